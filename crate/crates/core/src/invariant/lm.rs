//! The colimit of `Sub(x)` over the points of a model.
//!
//! A generator is a stored set `u` at context `x` together with a point `a`
//! of the model at `x`. Writing `τ_a` for the least stored set containing
//! `a`, the generator `u` at `a` is identified with `u ∧ τ_a`, so each point
//! contributes the down-set of `τ_a`. Along a coordinate map `f : x -> y`
//! the generator `v` at `f(a)` is identified with `τ_a ∧ f*v` at `a`; the
//! maps used are dropping the last coordinate, adjacent swaps and
//! duplicating a coordinate, which generate all coordinate maps between
//! contexts inside the bound. The order is generated by the order inside
//! each down-set.
//!
//! Two classes whose shortest representatives do not fit together in one
//! context inside the bound may have a join that only exists beyond it, so
//! the order found here can miss elements. The audit lifts every pair that
//! does fit and counts the pairs that do not.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use super::view::{ModelView, Point};
use crate::dlat::FinDistLattice;
use crate::semcat::{CtxId, SemCat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LmConfig {
    /// Longest context used for generators and lifted operations.
    pub pair_bound: usize,
    /// Number of sampled checks for each audit.
    pub samples: usize,
    pub seed: u64,
}

impl LmConfig {
    pub fn for_cat(cat: &SemCat) -> Self {
        LmConfig { pair_bound: cat.config.n_max, samples: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LmError {
    #[error("pair bound {bound} exceeds the saturation bound {n_max}")]
    BoundTooLarge { bound: usize, n_max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Generator {
    pub ctx: CtxId,
    pub point: Point,
    pub defset: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MergeRecord {
    pub kept: Generator,
    pub merged: Generator,
    /// Index list of the coordinate map along which the two were identified.
    pub sigma: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LmAudit {
    pub generators: usize,
    pub nodes: usize,
    pub merges: usize,
    pub merge_samples: Vec<MergeRecord>,
    /// Classes identified only because each was below the other.
    pub cycle_merges: usize,
    pub witness_checked: usize,
    pub witness_found: usize,
    pub ops_checked: usize,
    pub ops_failed: usize,
    /// Class pairs whose shortest representatives do not fit in one
    /// context inside the bound; their meet and join are unconfirmed.
    pub unlifted_pairs: usize,
    pub lattice_error: Option<String>,
}

impl LmAudit {
    /// Sampled same-class pairs that have a direct witness at the
    /// concatenated context.
    pub fn witness_fraction(&self) -> f64 {
        if self.witness_checked == 0 {
            1.0
        } else {
            self.witness_found as f64 / self.witness_checked as f64
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    ctx: CtxId,
    point: Point,
    tau: usize,
    down: usize,
}

#[derive(Debug, Clone)]
pub struct LmLattice {
    pub view: ModelView,
    pub pair_bound: usize,
    nodes: Vec<Node>,
    node_index: HashMap<(CtxId, Point), usize>,
    downs: Vec<Vec<usize>>,
    base: Vec<usize>,
    class: Vec<usize>,
    num_classes: usize,
    order: Vec<FixedBitSet>,
    /// Generator pairs whose union merged two classes: a spanning forest
    /// of the identifications.
    merge_edges: Vec<(usize, usize)>,
    /// `None` when the class order is not a distributive lattice.
    pub lattice: Option<FinDistLattice>,
    pub top: usize,
    pub bot: usize,
    pub reps: Vec<Generator>,
    pub audit: LmAudit,
}

pub(super) struct UnionFind(pub(super) Vec<usize>);

impl UnionFind {
    pub(super) fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    /// Merges the classes, keeping the smaller root. Returns whether they differed.
    pub(super) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.0[hi] = lo;
        true
    }
}

/// Generating coordinate maps out of `x` as `(target, sigma)`.
fn generating_maps(cat: &SemCat, x: CtxId, bound: usize) -> Vec<(CtxId, Vec<usize>)> {
    let xs = cat.sorts(x).to_vec();
    let n = xs.len();
    let mut out = Vec::new();
    if n > 0 {
        out.push((cat.ctx_id(&xs[..n - 1]).unwrap(), (0..n - 1).collect()));
    }
    for i in 0..n.saturating_sub(1) {
        let mut ys = xs.clone();
        ys.swap(i, i + 1);
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.swap(i, i + 1);
        out.push((cat.ctx_id(&ys).unwrap(), sigma));
    }
    if n < bound {
        for j in 0..n {
            let mut ys = xs.clone();
            ys.push(xs[j]);
            let sigma: Vec<usize> = (0..n).chain([j]).collect();
            out.push((cat.ctx_id(&ys).unwrap(), sigma));
        }
    }
    out
}

/// Covering pairs inside a down-set, as positions.
fn covers_within(cat: &SemCat, x: CtxId, down: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &a) in down.iter().enumerate() {
        let above: Vec<usize> =
            (0..down.len()).filter(|&j| j != i && cat.leq(x, a, down[j])).collect();
        for &j in &above {
            if !above.iter().any(|&k| k != j && cat.leq(x, down[k], down[j])) {
                out.push((i, j));
            }
        }
    }
    out
}

impl LmLattice {
    pub fn compute(cat: &SemCat, view: &ModelView, cfg: LmConfig) -> Result<LmLattice, LmError> {
        if cfg.pair_bound > cat.config.n_max {
            return Err(LmError::BoundTooLarge { bound: cfg.pair_bound, n_max: cat.config.n_max });
        }
        let ctxs: Vec<CtxId> = cat.contexts().filter(|&c| cat.sorts(c).len() <= cfg.pair_bound).collect();
        let mut nodes = Vec::new();
        let mut node_index = HashMap::new();
        let mut downs: Vec<Vec<usize>> = Vec::new();
        let mut down_cache: HashMap<(CtxId, usize), usize> = HashMap::new();
        for &x in &ctxs {
            for p in view.points(cat, x) {
                let tau = view.tau(cat, x, &p);
                let down = *down_cache.entry((x, tau)).or_insert_with(|| {
                    downs.push((0..cat.sub_len(x)).filter(|&d| cat.leq(x, d, tau)).collect());
                    downs.len() - 1
                });
                node_index.insert((x, p.clone()), nodes.len());
                nodes.push(Node { ctx: x, point: p, tau, down });
            }
        }
        let mut base = Vec::with_capacity(nodes.len());
        let mut total = 0;
        for nd in &nodes {
            base.push(total);
            total += downs[nd.down].len();
        }
        let gen_of = |nodes: &[Node], base: &[usize], n: usize, d: usize| -> usize {
            base[n] + downs[nodes[n].down].binary_search(&d).expect("element of the down-set")
        };
        let mut audit = LmAudit { generators: total, nodes: nodes.len(), ..LmAudit::default() };
        let mut uf = UnionFind((0..total).collect());
        let mut merge_edges = Vec::new();
        let mut pb_cache: HashMap<(CtxId, usize), Vec<usize>> = HashMap::new();
        let maps: HashMap<CtxId, Vec<(CtxId, Vec<usize>)>> =
            ctxs.iter().map(|&x| (x, generating_maps(cat, x, cfg.pair_bound))).collect();
        for n in 0..nodes.len() {
            let x = nodes[n].ctx;
            for (mi, (y, sigma)) in maps[&x].iter().enumerate() {
                let pb = pb_cache.entry((x, mi)).or_insert_with(|| {
                    (0..cat.sub_len(*y)).map(|v| cat.pullback(x, *y, sigma, v).expect("saturated")).collect()
                });
                let q = view.map_point(cat, x, *y, sigma, &nodes[n].point);
                let m = node_index[&(*y, q)];
                for &v in &downs[nodes[m].down] {
                    let w = cat.meet(x, nodes[n].tau, pb[v]);
                    let (g, h) = (gen_of(&nodes, &base, m, v), gen_of(&nodes, &base, n, w));
                    if uf.union(g, h) {
                        audit.merges += 1;
                        merge_edges.push((g, h));
                        if audit.merge_samples.len() < 20 {
                            audit.merge_samples.push(MergeRecord {
                                kept: Generator { ctx: *y, point: nodes[m].point.clone(), defset: v },
                                merged: Generator { ctx: x, point: nodes[n].point.clone(), defset: w },
                                sigma: sigma.clone(),
                            });
                        }
                    }
                }
            }
        }
        // classes numbered by first generator
        let mut class = vec![usize::MAX; total];
        let mut root_class: HashMap<usize, usize> = HashMap::new();
        for g in 0..total {
            let r = uf.find(g);
            let next = root_class.len();
            class[g] = *root_class.entry(r).or_insert(next);
        }
        let mut k = root_class.len();
        let mut cover_cache: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (n, nd) in nodes.iter().enumerate() {
            let covers = cover_cache.entry(nd.down).or_insert_with(|| covers_within(cat, nd.ctx, &downs[nd.down]));
            for &(i, j) in covers.iter() {
                let (a, b) = (class[base[n] + i], class[base[n] + j]);
                if a != b {
                    edges.insert((a, b));
                }
            }
        }
        let mut order = closure(k, &edges);
        // antisymmetry: classes below each other are identified
        let mut cuf = UnionFind((0..k).collect());
        for a in 0..k {
            for b in order[a].ones() {
                if a != b && order[b].contains(a) && cuf.union(a, b) {
                    audit.cycle_merges += 1;
                }
            }
        }
        if audit.cycle_merges > 0 {
            let mut renum: HashMap<usize, usize> = HashMap::new();
            let mut map = vec![0; k];
            for (a, slot) in map.iter_mut().enumerate() {
                let r = cuf.find(a);
                let next = renum.len();
                *slot = *renum.entry(r).or_insert(next);
            }
            for c in class.iter_mut() {
                *c = map[*c];
            }
            let edges: HashSet<(usize, usize)> =
                edges.iter().map(|&(a, b)| (map[a], map[b])).filter(|(a, b)| a != b).collect();
            k = renum.len();
            order = closure(k, &edges);
        }
        let mut reps = vec![None; k];
        for (n, nd) in nodes.iter().enumerate() {
            for (i, &d) in downs[nd.down].iter().enumerate() {
                let c = class[base[n] + i];
                if reps[c].is_none() {
                    reps[c] = Some(Generator { ctx: nd.ctx, point: nd.point.clone(), defset: d });
                }
            }
        }
        let reps: Vec<Generator> = reps.into_iter().map(Option::unwrap).collect();
        let lattice = match FinDistLattice::from_leq(k, |a, b| order[a].contains(b)) {
            Ok(l) => Some(l),
            Err(e) => {
                audit.lattice_error = Some(e.to_string());
                None
            }
        };
        let root = nodes.iter().position(|nd| cat.sorts(nd.ctx).is_empty()).expect("the empty context has one point");
        let top = class[gen_of(&nodes, &base, root, nodes[root].tau)];
        let bot = class[gen_of(&nodes, &base, root, cat.bot(nodes[root].ctx))];
        let mut lm = LmLattice {
            view: view.clone(),
            pair_bound: cfg.pair_bound,
            nodes,
            node_index,
            downs,
            base,
            class,
            num_classes: k,
            order,
            merge_edges,
            lattice,
            top,
            bot,
            reps,
            audit,
        };
        lm.run_audits(cat, cfg);
        Ok(lm)
    }

    pub fn len(&self) -> usize {
        self.num_classes
    }

    pub fn is_empty(&self) -> bool {
        self.num_classes == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order[a].contains(b)
    }

    /// Hasse diagram of the class order.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in self.order[a].ones() {
                if a != b && !self.order[a].ones().any(|c| c != a && c != b && self.order[c].contains(b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn has_point(&self, x: CtxId, p: &[usize]) -> bool {
        self.node_index.contains_key(&(x, p.to_vec()))
    }

    pub fn tau(&self, x: CtxId, p: &[usize]) -> usize {
        self.nodes[self.node_index[&(x, p.to_vec())]].tau
    }

    /// The class of `u` at the point `p` of context `x`.
    pub fn class_of(&self, cat: &SemCat, x: CtxId, p: &[usize], u: usize) -> usize {
        let n = self.node_index[&(x, p.to_vec())];
        let w = cat.meet(x, self.nodes[n].tau, u);
        let i = self.downs[self.nodes[n].down].binary_search(&w).unwrap();
        self.class[self.base[n] + i]
    }

    /// Every generator, as (context, point, reduced set, class).
    pub fn generators(&self) -> impl Iterator<Item = (CtxId, &Point, usize, usize)> + '_ {
        self.nodes.iter().enumerate().flat_map(move |(n, nd)| {
            self.downs[nd.down].iter().enumerate().map(move |(i, &d)| (nd.ctx, &nd.point, d, self.class[self.base[n] + i]))
        })
    }

    pub(super) fn num_generators(&self) -> usize {
        self.class.len()
    }

    pub(super) fn generator_class(&self, g: usize) -> usize {
        self.class[g]
    }

    pub(super) fn merge_edges(&self) -> &[(usize, usize)] {
        &self.merge_edges
    }

    /// Index of the generator `u ∧ τ_p` at `p`.
    pub(super) fn generator_index(&self, cat: &SemCat, x: CtxId, p: &[usize], u: usize) -> usize {
        let n = self.node_index[&(x, p.to_vec())];
        let w = cat.meet(x, self.nodes[n].tau, u);
        self.base[n] + self.downs[self.nodes[n].down].binary_search(&w).unwrap()
    }

    /// Covering pairs inside each down-set, as generator indices.
    pub(super) fn generator_covers(&self, cat: &SemCat) -> Vec<(usize, usize)> {
        let mut cache: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        let mut out = Vec::new();
        for (n, nd) in self.nodes.iter().enumerate() {
            let covers = cache.entry(nd.down).or_insert_with(|| covers_within(cat, nd.ctx, &self.downs[nd.down]));
            out.extend(covers.iter().map(|&(i, j)| (self.base[n] + i, self.base[n] + j)));
        }
        out
    }

    /// Points of the model at `x` inside the bound.
    pub fn points_at(&self, x: CtxId) -> Vec<&Point> {
        self.nodes.iter().filter(|nd| nd.ctx == x).map(|nd| &nd.point).collect()
    }

    /// Length of the shortest context representing class `c`.
    pub fn rep_len(&self, cat: &SemCat, c: usize) -> usize {
        cat.sorts(self.reps[c].ctx).len()
    }

    /// Every class order, meet and join was confirmed at a common context.
    pub fn is_complete(&self) -> bool {
        self.lattice.is_some() && self.audit.cycle_merges == 0 && self.audit.ops_failed == 0 && self.audit.unlifted_pairs == 0
    }

    fn run_audits(&mut self, cat: &SemCat, cfg: LmConfig) {
        if self.nodes.is_empty() {
            return;
        }
        let mut proj_cache: HashMap<(CtxId, CtxId, bool), Vec<usize>> = HashMap::new();
        let mut lifted = |lm: &LmLattice, (x, p, u): (CtxId, &Point, usize), (y, q, v): (CtxId, &Point, usize)| {
            let zs: Vec<_> = cat.sorts(x).iter().chain(cat.sorts(y)).copied().collect();
            let z = cat.ctx_id(&zs).unwrap();
            let (lx, lz) = (cat.sorts(x).len(), zs.len());
            let pl = proj_cache
                .entry((z, x, true))
                .or_insert_with(|| (0..cat.sub_len(x)).map(|u| cat.pullback(z, x, &(0..lx).collect::<Vec<_>>(), u).unwrap()).collect())[u];
            let pr = proj_cache
                .entry((z, y, false))
                .or_insert_with(|| (0..cat.sub_len(y)).map(|v| cat.pullback(z, y, &(lx..lz).collect::<Vec<_>>(), v).unwrap()).collect())[v];
            let c = lm.view.pair_point(cat, x, y, p, q);
            let tau = lm.tau(z, &c);
            (z, c, cat.meet(z, tau, pl), cat.meet(z, tau, pr), pl, pr)
        };
        // lifted operations on every pair of classes that fits
        let k = self.len();
        for a in 0..k {
            for b in a + 1..k {
                if self.rep_len(cat, a) + self.rep_len(cat, b) > cfg.pair_bound {
                    self.audit.unlifted_pairs += 1;
                    continue;
                }
                let (ra, rb) = (&self.reps[a], &self.reps[b]);
                let (z, c, _, _, pl, pr) = lifted(self, (ra.ctx, &ra.point, ra.defset), (rb.ctx, &rb.point, rb.defset));
                let m = self.class_of(cat, z, &c, cat.meet(z, pl, pr));
                let j = self.class_of(cat, z, &c, cat.join(z, pl, pr));
                self.audit.ops_checked += 1;
                let ok = match &self.lattice {
                    Some(l) => m == l.meet(a, b) && j == l.join(a, b),
                    None => (m == a) == self.leq(a, b) && (m == b) == self.leq(b, a),
                };
                if !ok {
                    self.audit.ops_failed += 1;
                }
            }
        }
        // sampled same-class pairs with a direct witness at the pair context
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
        let gens: Vec<(usize, usize)> =
            self.nodes.iter().enumerate().flat_map(|(n, nd)| (0..self.downs[nd.down].len()).map(move |i| (n, i))).collect();
        let mut tries = 0;
        while self.audit.witness_checked < cfg.samples && tries < cfg.samples * 50 {
            tries += 1;
            let (n1, i1) = gens[rng.gen_range(0..gens.len())];
            let (n2, i2) = gens[rng.gen_range(0..gens.len())];
            let (na, nb) = (&self.nodes[n1], &self.nodes[n2]);
            if self.class[self.base[n1] + i1] != self.class[self.base[n2] + i2]
                || cat.sorts(na.ctx).len() + cat.sorts(nb.ctx).len() > cfg.pair_bound
            {
                continue;
            }
            let (u, v) = (self.downs[na.down][i1], self.downs[nb.down][i2]);
            let (_, _, kl, kr, _, _) = lifted(self, (na.ctx, &na.point, u), (nb.ctx, &nb.point, v));
            self.audit.witness_checked += 1;
            if kl == kr {
                self.audit.witness_found += 1;
            }
        }
    }
}

/// Reflexive-transitive closure of an edge set on `0..k`.
pub(super) fn closure(k: usize, edges: &HashSet<(usize, usize)>) -> Vec<FixedBitSet> {
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    (0..k)
        .map(|s| {
            let mut seen = FixedBitSet::with_capacity(k);
            let mut stack = vec![s];
            seen.insert(s);
            while let Some(a) = stack.pop() {
                for &b in &adj[a] {
                    if !seen.put(b) {
                        stack.push(b);
                    }
                }
            }
            seen
        })
        .collect()
}
