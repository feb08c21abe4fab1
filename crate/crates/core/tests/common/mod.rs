#![allow(dead_code)]

use std::io::Write;

use macro_ale::driver::{Preset, ScenarioConfig};
use macro_ale::sparse::CsrMatrix;
use nalgebra::{DMatrix, DVector};

pub fn scenario(preset: Preset, n: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(preset);
    cfg.n = n;
    cfg
}

/// Dense LU solve of `k u = f`.
pub fn dense_solve(k: &CsrMatrix, f: &[f64]) -> Vec<f64> {
    let lu = k.to_dense().lu();
    lu.solve(&DVector::from_column_slice(f))
        .expect("oracle matrix is singular")
        .as_slice()
        .to_vec()
}

/// Dense solve of a block system whose three components are uncoupled,
/// done one component at a time. Panics if any entry couples components.
pub fn dense_solve_by_component(k: &CsrMatrix, f: &[f64]) -> Vec<f64> {
    let n = k.nrows();
    assert_eq!(n % 3, 0);
    let m = n / 3;
    let mut u = vec![0.0; n];
    for comp in 0..3 {
        let mut dense = DMatrix::zeros(m, m);
        for node in 0..m {
            let i = 3 * node + comp;
            let (cols, vals) = k.row(i);
            for (j, v) in cols.iter().zip(vals) {
                assert_eq!(j % 3, comp, "entry ({i}, {j}) couples components");
                dense[(node, j / 3)] = *v;
            }
        }
        let rhs = DVector::from_iterator(m, (0..m).map(|node| f[3 * node + comp]));
        let x = dense.lu().solve(&rhs).expect("oracle matrix is singular");
        for node in 0..m {
            u[3 * node + comp] = x[node];
        }
    }
    u
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `‖a − b‖∞ / ‖b‖∞`.
pub fn rel_max_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = max_abs(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Prints a verdict line past the test harness capture, then fails the test
/// if the criterion does not hold.
pub fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} [{status}] {name}: {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}
