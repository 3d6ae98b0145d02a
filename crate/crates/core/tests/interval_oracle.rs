mod common;

use bmolab::interval::{ap_characteristic_interval, bmo_norm_interval};
use common::{grid_step_functions, oracle_ap, oracle_bmo};

const CELLS: usize = 1000;

#[test]
fn bmo_norm_matches_dense_grid() {
    for (k, s) in grid_step_functions(100, CELLS, false, 11).iter().enumerate() {
        let (a, b) = (bmo_norm_interval(s), oracle_bmo(s, CELLS));
        assert!((a - b).abs() <= 1e-4, "case {k}: {a} vs oracle {b} for {s}");
    }
}

#[test]
fn ap_characteristic_matches_dense_grid() {
    for (k, s) in grid_step_functions(100, CELLS, true, 12).iter().enumerate() {
        for p in [2.0, 3.0] {
            let (a, b) = (ap_characteristic_interval(s, p).unwrap(), oracle_ap(s, p, CELLS));
            assert!((a - b).abs() <= 1e-4, "case {k}, p = {p}: {a} vs oracle {b} for {s}");
        }
    }
}

#[test]
fn module_never_below_grid() {
    // the module refines within cells, so it can only gain on the grid
    for s in grid_step_functions(20, 200, false, 13) {
        assert!(bmo_norm_interval(&s) >= oracle_bmo(&s, 200) - 1e-12);
    }
}
