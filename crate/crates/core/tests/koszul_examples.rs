use std::collections::BTreeSet;

use favres_core::resolution::{koszul_stratum_resolution, lower_dim_resolution, Bracket};
use favres_core::toy_model::{
    realize_bracket, realize_complex, realize_term, verify_exactness, verify_quasi_isomorphism,
    SweepMode, ToyComplex,
};
use favres_core::{Error, Params, Term, Weight};

/// 0 -> R[x]/(x_0^2) -> R[x]/(x_0^2) -> R/(x_0^2, x_1^2) ⊕ R/(x_0^2, x_2^2) -> R/(x_0^2, x_1^2, x_2^2) -> 0
fn stratum_instance(p: u64, m: u32) -> Bracket {
    let pr = Params::new(p, 3, m, 5).unwrap();
    let step = pr.step();
    let t = Term::new(&pr, Weight::new(vec![1, 1, 1], 1), vec![step, 0, 0]).unwrap();
    koszul_stratum_resolution(&pr, &t, &[0, step, step]).unwrap()
}

/// The lower resolution of R[x]/(x_0^2, x_1^2), ending in R/(x_0^2, x_1^2, x_2^2).
fn lower_instance() -> Bracket {
    let pr = Params::new(2, 3, 1, 5).unwrap();
    let t = Term::new(&pr, Weight::new(vec![1, 1, 1], 1), vec![2, 2, 0]).unwrap();
    lower_dim_resolution(&pr, &t, 2).unwrap()
}

#[test]
fn stratum_instance_is_exact_in_both_modes() {
    let tc = realize_bracket(&stratum_instance(3, 1)).unwrap();
    assert_eq!(
        tc.modules.iter().map(Vec::len).collect::<Vec<_>>(),
        vec![1, 1, 2, 1]
    );
    for mode in [SweepMode::Cells, SweepMode::Exhaustive] {
        let rep = verify_exactness(&tc, &[5, 5, 5], mode).unwrap();
        assert!(rep.is_exact(), "{mode:?}: {:?}", rep.failures);
    }
}

#[test]
fn lower_instance_is_exact_in_both_modes() {
    let tc = realize_bracket(&lower_instance()).unwrap();
    assert_eq!(
        tc.modules.iter().map(Vec::len).collect::<Vec<_>>(),
        vec![1, 1, 3, 3, 1]
    );
    for mode in [SweepMode::Cells, SweepMode::Exhaustive] {
        let rep = verify_exactness(&tc, &[7, 7, 7], mode).unwrap();
        assert!(rep.is_exact(), "{mode:?}: {:?}", rep.failures);
        assert!(rep.strands_checked > 0);
    }
}

#[test]
fn box_below_critical_values_is_refused() {
    let tc = realize_bracket(&lower_instance()).unwrap();
    assert!(matches!(
        verify_exactness(&tc, &[2, 2, 2], SweepMode::Cells),
        Err(Error::BoxTooSmall { .. })
    ));
}

#[test]
fn dropping_the_last_term_breaks_exactness() {
    let b = lower_instance();
    let tc = realize_bracket(&b).unwrap();
    let mut modules = tc.modules.clone();
    let mut maps = tc.maps.clone();
    modules.pop();
    maps.pop();
    let cut = ToyComplex::new(tc.ring, tc.g, tc.lo, modules, maps).unwrap();
    let rep = verify_exactness(&cut, &cut.required_box(), SweepMode::Cells).unwrap();
    assert!(!rep.is_exact());
    assert!(rep.failures.iter().all(|f| f.degree == 2));
}

#[test]
fn non_unit_in_map_is_reported_with_divisors() {
    // over Z/9 the in-map 3·h̃_E leaves Z/3 homology at the source and cokernel
    let b = stratum_instance(3, 2);
    let tc = realize_complex(&b.complex).unwrap();
    let mut e = b.in_map();
    e.alpha = 3;
    let rep = verify_quasi_isomorphism(
        &realize_term(&b.source),
        &[e],
        &tc,
        &tc.required_box().iter().map(|x| x + 1).collect::<Vec<_>>(),
        SweepMode::Cells,
    )
    .unwrap();
    assert!(!rep.is_exact());
    assert!(rep.failures.iter().all(|f| f.divisors == vec![1]));
    assert!(rep.failures.iter().any(|f| f.degree == -1));
    assert!(rep.failures.iter().any(|f| f.degree == 0));
}

#[test]
fn cells_and_exhaustive_agree_on_failures() {
    let b = stratum_instance(3, 2);
    let tc = realize_complex(&b.complex).unwrap();
    let mut e = b.in_map();
    e.alpha = 3;
    let aug =
        favres_core::toy_model::augmented(tc.ring, &realize_term(&b.source), &[e], &tc).unwrap();
    let bx = aug.required_box();
    let cells = verify_exactness(&aug, &bx, SweepMode::Cells).unwrap();
    let all = verify_exactness(&aug, &bx, SweepMode::Exhaustive).unwrap();
    let kinds = |r: &favres_core::toy_model::ExactnessReport| -> BTreeSet<(i64, Vec<u32>)> {
        r.failures
            .iter()
            .map(|f| (f.degree, f.divisors.clone()))
            .collect()
    };
    assert!(!cells.is_exact());
    assert_eq!(kinds(&cells), kinds(&all));
    // cell representatives are points of the box, so they are found by both sweeps
    let everywhere: BTreeSet<_> = all
        .failures
        .iter()
        .map(|f| (&f.multidegree, f.degree))
        .collect();
    assert!(cells
        .failures
        .iter()
        .all(|f| everywhere.contains(&(&f.multidegree, f.degree))));
}
