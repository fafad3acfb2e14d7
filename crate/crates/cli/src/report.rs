use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub nmax: usize,
    pub seed: u64,
    pub max_lattice: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub title: String,
    pub lines: Vec<String>,
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    /// Present when the verdict depends on the context bound.
    pub bound: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub config: Config,
    pub notes: Vec<String>,
    pub sections: Vec<Section>,
    pub verdicts: Vec<Verdict>,
    pub audit: Vec<String>,
}

impl Report {
    pub fn new(command: Vec<String>, config: Config) -> Self {
        Report { command, config, notes: Vec::new(), sections: Vec::new(), verdicts: Vec::new(), audit: Vec::new() }
    }

    pub fn section(&mut self, title: impl Into<String>, lines: Vec<String>, data: impl Serialize) -> &mut Self {
        let data = serde_json::to_value(data).expect("report data serializes");
        self.sections.push(Section { title: title.into(), lines, data });
        self
    }

    pub fn verdict(&mut self, name: impl Into<String>, holds: bool, bound: Option<String>) -> &mut Self {
        self.verdicts.push(Verdict { name: name.into(), holds, bound });
        self
    }

    pub fn render(&self, structured: bool) -> String {
        if structured {
            return serde_json::to_string_pretty(self).expect("report serializes") + "\n";
        }
        let mut out = String::new();
        let _ = writeln!(out, "# posmod {}", self.command.join(" "));
        let c = &self.config;
        let _ = writeln!(out, "# nmax={} seed={} max-lattice={}", c.nmax, c.seed, c.max_lattice);
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n== {}", s.title);
            for l in &s.lines {
                let _ = writeln!(out, "  {l}");
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(out, "\n== verdicts");
            for v in &self.verdicts {
                let yn = if v.holds { "yes" } else { "no" };
                match &v.bound {
                    Some(b) => {
                        let _ = writeln!(out, "  {}: {yn} [{b}]", v.name);
                    }
                    None => {
                        let _ = writeln!(out, "  {}: {yn}", v.name);
                    }
                }
            }
        }
        if !self.audit.is_empty() {
            let _ = writeln!(out, "\n== audit");
            for a in &self.audit {
                let _ = writeln!(out, "  {a}");
            }
        }
        out
    }
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input: exit 2.
    Input(String),
    /// A model violates an axiom: exit 3.
    Axiom(String),
    /// Two independent computations disagree: exit 4.
    Oracle(String),
    /// Anything else, such as a lattice cutoff: exit 1.
    Other(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Axiom(_) => 3,
            CliError::Oracle(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Axiom(m) | CliError::Oracle(m) | CliError::Other(m) => m,
        }
    }
}
