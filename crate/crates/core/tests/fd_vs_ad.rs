//! Jet Hessians against Richardson-extrapolated central differences.

mod common;

#[test]
fn every_field_matches_finite_differences() {
    for (i, case) in common::field_cases().iter().enumerate() {
        let (err, p) = common::fd_ad_max_relative(case, 1000, 100 + i as u64);
        assert!(
            err <= 1e-6,
            "{}: relative error {err:.3e} at {:?}",
            case.field.name(),
            p.coords()
        );
    }
}
