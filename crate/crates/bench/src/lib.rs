//! Benchmark fixtures.

use rapdb::generate::random_qcqp;
use rapdb::{Iterate, ProblemInstance};

/// A random QCQP and the zero starting point.
pub fn fixture(n: usize, m: usize, seed: u64) -> (ProblemInstance, Iterate) {
    let inst = random_qcqp(n, m, seed).expect("valid generator arguments");
    let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
    (inst, z0)
}

/// Solver names timed by the benchmark.
pub const SOLVERS: [&str; 6] = ["apdb-yx", "apdb-yx-nm", "rapdb-yx-nm", "apdb-xy", "rapdb-xy-nm", "egm:0.01"];
