use hgm::elimination::*;
use hgm::elliptic::{EllipticCurveQ, Family};
use hgm::hgm_core::{rat, HgmParameter};
use hgm::ntheory::{gcd, pow_mod};
use hgm::CyclotomicRational;
use proptest::prelude::*;

fn fermat5() -> DiophantineInstance {
    let p = HgmParameter::parse("1/10,-1/10;1/5,-1/5").unwrap();
    DiophantineInstance::new(1, 1, 2, 5, 5, p).unwrap()
}

fn cubic_instance() -> DiophantineInstance {
    let p = HgmParameter::parse("1/6,-1/6;1/3,-1/3").unwrap();
    DiophantineInstance::new(1, 1, 2, 3, 3, p).unwrap()
}

#[test]
fn instance_validation() {
    let p = || HgmParameter::parse("1/10,-1/10;1/5,-1/5").unwrap();
    assert!(DiophantineInstance::new(0, 1, 2, 5, 5, p()).is_err());
    assert!(DiophantineInstance::new(2, 1, 4, 5, 5, p()).is_err());
    assert!(DiophantineInstance::new(1, 1, 2, 4, 5, p()).is_err());
    assert!(DiophantineInstance::new(1, 1, 2, 2, 5, p()).is_err());
    let ng = HgmParameter::parse("1/2,1/2;1/2,1").unwrap();
    assert!(DiophantineInstance::new(1, 1, 2, 5, 5, ng).is_err());
    assert_eq!(DiophantineInstance::parse("1,1,2,5,5", p()).unwrap(), fermat5());
    assert!(DiophantineInstance::parse("1,1,2,5", p()).is_err());
    assert_eq!(fermat5().t0(1, 1), rat(1, 2));
}

#[test]
fn admissible_primes() {
    let inst = fermat5();
    assert_eq!(admissible_ells(&inst, 3, 60), vec![11, 31, 41]);
    assert!(inst.admissible(5).is_err());
    assert!(inst.admissible(13).is_err());
    assert!(matches!(solutions_mod_ell(&inst, 13), Err(ElimError::Inadmissible(13, _))));
}

#[test]
fn parametrization_matches_brute_force() {
    let inst = fermat5();
    let s = solutions_mod_ell(&inst, 11).unwrap();
    // r coprime to ℓ − 1 makes β̃ ↦ β̃^r a bijection
    assert_eq!(count_s_ell_bruteforce(&inst, 11, 7), 120);
    assert_eq!(s.total(), 120);
    let inst = cubic_instance();
    for (ell, r) in [(13u64, 5u64), (13, 7), (19, 5), (31, 7)] {
        assert_eq!(gcd(r, ell - 1), 1);
        let s = solutions_mod_ell(&inst, ell).unwrap();
        assert_eq!(s.total() as u64, count_s_ell_bruteforce(&inst, ell, r), "ell={}", ell);
    }
}

#[test]
fn case_membership() {
    let inst = fermat5();
    for ell in [11u64, 31, 41] {
        let s = solutions_mod_ell(&inst, ell).unwrap();
        assert!(s.members[&SolutionCase::Case1].contains(&(1, 1)));
        // β̃ = 0 iff α̃^5 ≡ 2γ̃^5
        let case3 = (0..ell)
            .flat_map(|a| (0..ell).map(move |g| (a, g)))
            .filter(|&(a, g)| (a, g) != (0, 0) && pow_mod(a, 5, ell) == 2 * pow_mod(g, 5, ell) % ell)
            .count();
        assert_eq!(s.count(SolutionCase::Case3), case3);
        assert_eq!(s.count(SolutionCase::Case2Alpha), (ell - 1) as usize);
        assert_eq!(s.count(SolutionCase::Case2Gamma), (ell - 1) as usize);
    }
}

#[test]
fn true_solution_survives() {
    let inst = fermat5();
    let ells = admissible_ells(&inst, 3, 60);
    let form = synth_form_from_motive(&inst, &inst.t0(1, 1), &ells).unwrap();
    assert_eq!(form.provenance, Provenance::FromMotive);
    let rep = eliminate(&form, &inst, &ells, 5).unwrap();
    for r in &rep.rows {
        assert!(r.survived, "ell={}", r.ell);
        assert!(r.witnesses.iter().any(|w| w.starts_with("case1")));
    }
    assert!(rep.aggregate.survives);
}

#[test]
fn unrelated_curve_is_eliminated() {
    let inst = fermat5();
    let e = EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap();
    let form = synth_form_from_curve(&e, 10, &[11, 31, 41]).unwrap();
    let rep = eliminate(&form, &inst, &[41, 11, 31, 11], 5).unwrap();
    assert_eq!(rep.rows.iter().map(|r| r.ell).collect::<Vec<_>>(), vec![11, 31, 41]);
    assert!(!rep.aggregate.survives);
    assert_eq!(rep.aggregate.gcd, "1936");
    assert_eq!(rep.aggregate.candidate_r, vec!["2", "11"]);
    assert_eq!(rep.aggregate.bound.as_deref(), Some("11"));
    assert!(!rep.aggregate.eliminated_above_floor);
    let rep12 = eliminate(&form, &inst, &[11, 31, 41], 11).unwrap();
    assert!(rep12.aggregate.eliminated_above_floor);
    // rows report each product, and the gcd divides each of them
    for r in &rep.rows {
        let p: num_bigint::BigInt = r.product.parse().unwrap();
        assert!((p % 1936u32) == 0.into());
    }
}

#[test]
fn reports_are_deterministic() {
    let inst = fermat5();
    let e = EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap();
    let form = synth_form_from_curve(&e, 10, &[11, 31, 41]).unwrap();
    let a = eliminate(&form, &inst, &[11, 31, 41], 5).unwrap().to_json();
    let b = eliminate(&form, &inst, &[41, 31, 11], 5).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn case3_plus_branch_witness() {
    // C = A makes β̃ = 0 reachable at every ℓ
    let p = HgmParameter::parse("1/10,-1/10;1/5,-1/5").unwrap();
    let inst = DiophantineInstance::new(1, 2, 1, 5, 5, p).unwrap();
    let mut form = synth_form_from_curve(&EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap(), 10, &[11]).unwrap();
    form.entries.insert(11, CyclotomicRational::from_int(10, 12));
    let row = eliminate_at_ell(&form, &inst, 11).unwrap();
    assert!(row.counts.case3 > 0);
    assert!(row.witnesses.iter().any(|w| w == "case3 +(ℓ+1)"), "{:?}", row.witnesses);
    assert!(row.survived);
    assert_eq!(row.product, "0");
}

#[test]
fn missing_coefficient_is_skipped() {
    let inst = fermat5();
    let form = synth_form_from_curve(&EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap(), 10, &[11]).unwrap();
    let row = eliminate_at_ell(&form, &inst, 31).unwrap();
    assert!(row.notices[0].contains("no coefficient"));
}

#[test]
fn random_coefficients_give_finite_divisor_sets() {
    let inst = fermat5();
    let mut form = synth_form_from_curve(&EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap(), 10, &[11]).unwrap();
    for a in [-6i64, -5, -3, 1, 4, 5] {
        form.entries.insert(11, CyclotomicRational::from_int(10, a));
        let row = eliminate_at_ell(&form, &inst, 11).unwrap();
        assert!(!row.survived, "a={}", a);
        assert!(row.norms.iter().all(|n| n != "0"));
        assert_eq!(row.excluded_r, vec![2, 5]);
    }
}

fn row(product: &str, survived: bool) -> EliminationRow {
    EliminationRow {
        ell: 11,
        counts: CaseCounts { case1: 0, case2_alpha: 0, case2_gamma: 0, case3: 0 },
        norms: vec![],
        witnesses: vec![],
        notices: vec![],
        survived,
        product: product.into(),
        excluded_r: vec![],
    }
}

#[test]
fn combine_examples() {
    let agg = combine(&[row("40", false), row("28", false)], 5);
    assert_eq!(agg.gcd, "4");
    assert_eq!(agg.candidate_r, vec!["2"]);
    assert!(agg.eliminated_above_floor);
    let agg = combine(&[row("231", false)], 5);
    assert_eq!(agg.gcd, "231");
    assert_eq!(agg.candidate_r, vec!["3", "7", "11"]);
    assert_eq!(agg.bound.as_deref(), Some("11"));
    let agg = combine(&[row("0", true), row("35", false)], 5);
    assert_eq!(agg.gcd, "35");
    let agg = combine(&[row("0", true), row("0", true)], 5);
    assert!(agg.survives);
}

#[test]
fn form_files() {
    let e = Family::Legendre.model(&rat(1, 2)).unwrap();
    let good: Vec<u64> = hgm::ntheory::primes_between(3, 100).into_iter().filter(|&l| e.is_good_at(l)).collect();
    let form = synth_form_from_curve(&e, 1, &good).unwrap();
    assert!(form.warnings.is_empty());
    for (l, a) in &form.entries {
        assert_eq!(rational_value(a), Some(e.ap(*l).unwrap()));
    }
    let dir = tempfile_dir();
    let path = dir.join("form.json");
    write_form(&form, &path).unwrap();
    let back = ingest_form(&path).unwrap();
    assert_eq!(back.entries, form.entries);
    assert_eq!(back.level, form.level);
    assert_eq!(back.provenance, Provenance::File);
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(matches!(ingest_form(&dir.join("missing.json")), Err(ElimError::Io(_))));
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("hgm-elim-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn schema_errors() {
    let bad = [
        r#"{"level": 5, "coefficients": [{"ell": 11, "a": {"level": 5, "coeffs": ["1/2", 0, 0, 0]}}]}"#,
        r#"{"level": 5, "coefficients": [{"ell": 11, "a": {"level": 5, "coeffs": ["x", 0, 0, 0]}}]}"#,
        r#"{"level": 5, "coefficients": [{"ell": 11, "a": {"level": 10, "coeffs": [1, 0, 0, 0]}}]}"#,
        r#"{"level": 5, "coefficients": [], "extra": 1}"#,
        "{\"level\": 5,\n \"coefficients\": [{\"ell\": 11, \"a\": {\"level\": 5, \"coeffs\": [1, 0, 0, 0]}},\n {\"ell\": 11, \"a\": {\"level\": 5, \"coeffs\": [2, 0, 0, 0]}}]}",
        "{\n\"level\": 5,\n",
    ];
    for s in bad {
        assert!(matches!(FormCoefficients::from_json(s), Err(ElimError::Schema(_))), "{}", s);
    }
    match FormCoefficients::from_json("{\n\"level\": 5,\n") {
        Err(ElimError::Schema(m)) => assert!(m.contains("line 3"), "{}", m),
        other => panic!("{:?}", other),
    }
    let weil = r#"{"level": 5, "coefficients": [{"ell": 11, "a": {"level": 5, "coeffs": [100, 0, 0, 0]}}]}"#;
    let f = FormCoefficients::from_json(weil).unwrap();
    assert_eq!(f.warnings.len(), 1);
}

fn instance_strategy() -> impl Strategy<Value = (DiophantineInstance, u64)> {
    (prop::sample::select(vec![(1i64, 1i64, 2i64), (1, 2, 3), (3, 1, 1), (1, -1, 5), (7, 2, 1)]), 0usize..2).prop_flat_map(|((a, b, c), k)| {
        let (params, p, ells) = if k == 0 {
            ("1/10,-1/10;1/5,-1/5", 5u64, vec![11u64, 31, 41, 61, 71])
        } else {
            ("1/6,-1/6;1/3,-1/3", 3, vec![13, 19, 31, 37, 43])
        };
        let inst = DiophantineInstance::new(a, b, c, p, p, HgmParameter::parse(params).unwrap()).unwrap();
        prop::sample::select(ells).prop_map(move |l| (inst.clone(), l))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn case_partition_is_complete((inst, ell) in instance_strategy()) {
        prop_assume!(inst.admissible(ell).is_ok());
        let s = solutions_mod_ell(&inst, ell).unwrap();
        let mut all: Vec<(u64, u64)> = s.members.values().flatten().copied().collect();
        let n = all.len();
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(n as u64, ell * ell - 1);
        prop_assert!(!all.contains(&(0, 0)));
    }
}

#[test]
fn norms_are_integers() {
    // δ with an ℓ-power denominator still yields an integral norm
    let inst = fermat5();
    let mut form = synth_form_from_curve(&EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap(), 10, &[11]).unwrap();
    let z = CyclotomicRational::zeta_pow(10, 1);
    form.entries.insert(11, &z + &CyclotomicRational::from_int(10, 1));
    let row = eliminate_at_ell(&form, &inst, 11).unwrap();
    for n in &row.norms {
        assert!(n.parse::<num_bigint::BigInt>().is_ok());
    }
}
