//! Problem collections: the bundled desk-scale corpus and directories of
//! `.prob` files. A file may declare its known optimum in a comment line
//! `# optimum: <value>`.

use std::fs;
use std::io;
use std::path::Path;

use crate::expr::{parse_problem, ParseError, Problem};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub text: String,
    pub optimum: Option<f64>,
}

impl CorpusEntry {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> CorpusEntry {
        let text = text.into();
        let optimum = declared_optimum(&text);
        CorpusEntry { name: name.into(), text, optimum }
    }

    pub fn problem(&self) -> Result<Problem, ParseError> {
        parse_problem(&self.text)
    }
}

/// Value of the first `# optimum: v` comment, if any.
pub fn declared_optimum(text: &str) -> Option<f64> {
    text.lines().find_map(|l| {
        let rest = l.trim().strip_prefix('#')?.trim().strip_prefix("optimum:")?;
        rest.trim().parse().ok()
    })
}

macro_rules! bundled_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".prob")))),*]
    };
}

const BUNDLED: &[(&str, &str)] = bundled_files!(
    "circle_linear",
    "sqr_branch",
    "sphere_linear",
    "circle_bilinear",
    "double_well",
    "disk_linear",
    "disconnected",
    "interior_exp",
    "product_constraint",
    "sine_curve",
    "log_barrier",
    "sqrt_constraint",
);

/// The twelve bundled problems, each with a known optimum.
pub fn bundled() -> Vec<CorpusEntry> {
    BUNDLED.iter().map(|(n, t)| CorpusEntry::new(*n, *t)).collect()
}

/// All `*.prob` files of a directory, sorted by file name.
pub fn load_dir(dir: &Path) -> io::Result<Vec<CorpusEntry>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "prob"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(CorpusEntry::new(name, fs::read_to_string(&p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_parses_with_optima() {
        let c = bundled();
        assert_eq!(c.len(), 12);
        for e in &c {
            e.problem().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert!(e.optimum.is_some(), "{} lacks an optimum", e.name);
        }
    }

    #[test]
    fn optimum_comment() {
        assert_eq!(declared_optimum("# hi\n  # optimum: -1.5\nvar x in [0,1];"), Some(-1.5));
        assert_eq!(declared_optimum("var x in [0,1];"), None);
    }
}
