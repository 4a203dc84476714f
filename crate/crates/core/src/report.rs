//! One JSON summary for a run: module reports, named checks, seeds and tolerances.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Bundle {
    reports: BTreeMap<String, Value>,
    checks: BTreeMap<String, Check>,
    seeds: BTreeMap<String, u64>,
    tolerances: BTreeMap<String, f64>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_report<R: Serialize>(&mut self, name: &str, report: &R) -> Result<()> {
        let v = serde_json::to_value(report).map_err(|e| Error::Input(format!("report {name}: {e}")))?;
        self.reports.insert(name.to_string(), v);
        Ok(())
    }

    pub fn add_check(&mut self, name: &str, pass: bool, value: f64, tolerance: f64) {
        self.checks.insert(name.to_string(), Check { pass, value, tolerance });
    }

    pub fn add_seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    pub fn add_tolerance(&mut self, name: &str, tol: f64) {
        self.tolerances.insert(name.to_string(), tol);
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty() && self.checks.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    all_pass: bool,
    checks: &'a BTreeMap<String, Check>,
    reports: &'a BTreeMap<String, Value>,
    seeds: &'a BTreeMap<String, u64>,
    tolerances: &'a BTreeMap<String, f64>,
    version: &'static str,
}

/// Pretty JSON with keys sorted at every level; identical bundles give identical bytes.
pub fn report(bundle: &Bundle) -> Result<String> {
    if bundle.is_empty() {
        return Err(Error::Input("report bundle is empty".into()));
    }
    let summary = Summary {
        all_pass: bundle.all_pass(),
        checks: &bundle.checks,
        reports: &bundle.reports,
        seeds: &bundle.seeds,
        tolerances: &bundle.tolerances,
        version: env!("CARGO_PKG_VERSION"),
    };
    // a round trip through Value sorts the keys of nested report structs
    let value = serde_json::to_value(&summary).map_err(|e| Error::Input(e.to_string()))?;
    serde_json::to_string_pretty(&value).map_err(|e| Error::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Zed {
        zz: f64,
        aa: u32,
    }

    fn sample(pass: bool) -> Bundle {
        let mut b = Bundle::new();
        b.add_report("zed", &Zed { zz: 1.5, aa: 3 }).unwrap();
        b.add_check("energy", pass, 9.43, 0.02);
        b.add_seed("wos", 7);
        b.add_tolerance("cg", 1e-10);
        b
    }

    #[test]
    fn empty_bundle_is_refused() {
        assert!(matches!(report(&Bundle::new()), Err(Error::Input(_))));
    }

    #[test]
    fn output_is_deterministic_and_sorted() {
        let (a, b) = (report(&sample(true)).unwrap(), report(&sample(true)).unwrap());
        assert_eq!(a, b);
        assert!(a.find("\"aa\"").unwrap() < a.find("\"zz\"").unwrap());
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["all_pass"], Value::Bool(true));
        assert_eq!(v["version"], Value::String(env!("CARGO_PKG_VERSION").into()));
    }

    #[test]
    fn failed_check_clears_all_pass() {
        let v: Value = serde_json::from_str(&report(&sample(false)).unwrap()).unwrap();
        assert_eq!(v["all_pass"], Value::Bool(false));
    }
}
