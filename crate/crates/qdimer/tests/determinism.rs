use qdimer::connection::build_quantum_identity;
use qdimer::density::{rho_from_table, GreenTable};
use qdimer::generators;
use qdimer::kasteleyn::verify_kasteleyn;
use qdimer::par;
use qdimer::qtrace::traces;
use qdimer::stats::measure_report;

#[test]
fn green_table_is_bitwise_reproducible() {
    let a = par::run_sequential(|| GreenTable::for_cutoff(20).unwrap());
    let b = GreenTable::for_cutoff(20).unwrap();
    let c = GreenTable::for_cutoff(20).unwrap();
    assert_eq!(a.values(), b.values());
    assert_eq!(b.values(), c.values());
    let ra = rho_from_table(&a).unwrap();
    let rb = rho_from_table(&b).unwrap();
    assert_eq!(ra.rho.to_bits(), rb.rho.to_bits());
    assert_eq!(ra.partial, rb.partial);
}

#[test]
fn exact_reductions_do_not_depend_on_scheduling() {
    let g = generators::honeycomb_patch(2, 1).unwrap();
    for n in 1..=3 {
        let phi = build_quantum_identity(&g, n).unwrap();
        let seq = par::run_sequential(|| traces(&phi, &g, n).unwrap());
        assert_eq!(seq, traces(&phi, &g, n).unwrap());
        let v = par::run_sequential(|| verify_kasteleyn(&phi, &g, n).unwrap());
        assert_eq!(v, verify_kasteleyn(&phi, &g, n).unwrap());
        let r = par::run_sequential(|| measure_report(&g, n).unwrap());
        assert_eq!(r, measure_report(&g, n).unwrap());
    }
}
