use osclab::dispersive::{euler_poisson_root, waterwave_root};
use osclab::registry::{get_case, list_cases, self_test, CaseKind};
use osclab::statphase1d::QuadraticProblem;
use osclab::statphasend::NDProblem;
use osclab::vandercorput::DegenerateProblem;
use osclab::Error;

#[test]
fn every_case_is_constructible_and_consistent() {
    let ids: Vec<&str> = list_cases(None).iter().map(|c| c.id).collect();
    assert_eq!(ids.len(), osclab::registry::CASE_IDS.len());
    let entries = self_test();
    assert!(entries.iter().all(|e| e.ok()));
    assert!(entries.iter().any(|e| e.counterexample));
}

#[test]
fn admissible_1d_phases_build_their_problems() {
    for c in list_cases(Some(CaseKind::Phase1d)).into_iter().filter(|c| !c.counterexample) {
        let amp = get_case(c.default_amp.unwrap_or("bump-half")).unwrap();
        let amp = amp.profile().unwrap();
        match c.order.unwrap_or(1) {
            1 => {
                QuadraticProblem::new(c.profile().unwrap(), amp).unwrap();
            }
            k => {
                DegenerateProblem::new(c.profile().unwrap(), amp, k, 2.0).unwrap();
            }
        }
    }
}

#[test]
fn counterexamples_are_rejected_downstream() {
    let amp = get_case("bump-half").unwrap();
    let steep = get_case("steep-quad").unwrap();
    assert!(steep.check().unwrap_err().is_rejection());
    let van = get_case("vanishing-k2").unwrap();
    let err = DegenerateProblem::new(van.profile().unwrap(), amp.profile().unwrap(), 2, 2.0).unwrap_err();
    assert!(err.is_rejection(), "{err}");
}

#[test]
fn admissible_fields_accept_the_standard_amplitude() {
    let amp = get_case("bump2d").unwrap();
    for c in list_cases(Some(CaseKind::Field2d)).into_iter().filter(|c| !c.counterexample) {
        NDProblem::new(c.field().unwrap(), amp.field().unwrap()).unwrap();
    }
    let cusp = get_case("cusp").unwrap();
    assert!(NDProblem::new(cusp.field().unwrap(), amp.field().unwrap()).is_err());
}

#[test]
fn symbol_roots() {
    let ww = get_case("waterwave").unwrap();
    let sym = ww.symbol().unwrap();
    let r0 = sym.degenerate_point().unwrap();
    assert!((r0 - (2.0 / 3f64.sqrt() - 1.0).sqrt()).abs() < 1e-10);
    assert!((r0 - waterwave_root()).abs() < 1e-12);
    let ep = get_case("euler-poisson").unwrap();
    let r1 = ep.symbol().unwrap().degenerate_point().unwrap();
    assert!((r1 - (1.0 + 7f64.sqrt()).sqrt()).abs() < 1e-10);
    assert!((r1 - euler_poisson_root()).abs() < 1e-10);
    assert!(get_case("control-quadratic").unwrap().symbol().unwrap().degenerate_point().is_none());
}

#[test]
fn unknown_ids() {
    assert!(matches!(get_case("no-such-case"), Err(Error::NotFound(_))));
    assert!(CaseKind::parse("phase3d").is_err());
    for k in ["phase1d", "ampl1d", "field2d", "ampl2d", "symbol", "implicit"] {
        assert_eq!(CaseKind::parse(k).unwrap().as_str(), k);
    }
}
