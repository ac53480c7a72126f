//! Property definitions shared by the property test targets and the
//! acceptance suite.
#![allow(dead_code)]

pub mod exprlang;
pub mod layer;

use std::fmt::Debug;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 1000;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        max_global_rejects: 100_000,
        ..Config::default()
    }
}

/// Runs one property outside the `proptest!` macro.
pub fn run<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        failure_persistence: None,
        ..config(cases)
    };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}

/// Every property of both suites, by name.
pub fn all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    let mut out = exprlang::suite(cases);
    out.extend(layer::suite(cases));
    out
}
