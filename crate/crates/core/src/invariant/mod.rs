//! The colimit lattice `LM` of a model's definable sets and the
//! constructions built on it.

mod lm;
mod poscl;
mod posetal;
mod product;
mod search;
mod view;

pub use lm::{Generator, LmAudit, LmConfig, LmError, LmLattice, MergeRecord};
pub use poscl::{
    check_hom_elementarity_vs_tp, failing_triples, is_positively_closed_direct, l_of_hom, nat_transformations, tp,
    ElementarityVsTp, LHom, NatReport, NatTrans, PcCounterexample,
};
pub use posetal::{posetal_family, posetal_import, PosetalError, PosetalFamily, PosetalReport};
pub use product::{lm_product_check, lm_product_check_default, ProductCheck, ProductError, ProductMode};
pub use search::{enumerate_models, search_positively_closed, SearchConfig, SearchOutcome};
pub use view::{ModelView, Point};

#[cfg(test)]
mod tests;
