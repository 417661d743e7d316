use hgm::elliptic::*;
use hgm::hgm_core::rat;
use hgm::ntheory::{is_prime, legendre};
use hgm::Rat;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..hi).filter(|&q| is_prime(q)).collect()
}

/// Discriminant from the a-invariants, written out independently.
fn disc_oracle(e: &EllipticCurveQ) -> Rat {
    let (a1, a2, a3, a4, a6) = (&e.a1, &e.a2, &e.a3, &e.a4, &e.a6);
    let two = Rat::from_integer(2.into());
    let four = Rat::from_integer(4.into());
    let b2 = a1 * a1 + &four * a2;
    let b4 = a1 * a3 + &two * a4;
    let b6 = a3 * a3 + &four * a6;
    let b8 = a1 * a1 * a6 + &four * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let k = |n: i64| Rat::from_integer(n.into());
    -(&b2 * &b2 * &b8) - k(8) * &b4 * &b4 * &b4 - k(27) * &b6 * &b6 + k(9) * &b2 * &b4 * &b6
}

fn j_oracle(e: &EllipticCurveQ) -> Rat {
    let (a1, a2, a3, a4) = (&e.a1, &e.a2, &e.a3, &e.a4);
    let k = |n: i64| Rat::from_integer(n.into());
    let b2 = a1 * a1 + k(4) * a2;
    let b4 = a1 * a3 + k(2) * a4;
    let c4 = &b2 * &b2 - k(24) * &b4;
    &c4 * &c4 * &c4 / disc_oracle(e)
}

/// a_ℓ by counting affine solutions over all (x, y).
fn ap_oracle(m: &IntModel, ell: u64) -> i64 {
    let l = ell as i128;
    let r = |x: &BigInt| {
        let v: i128 = (x % BigInt::from(ell)).try_into().unwrap();
        v.rem_euclid(l)
    };
    let (a1, a2, a3, a4, a6) = (r(&m.a1), r(&m.a2), r(&m.a3), r(&m.a4), r(&m.a6));
    let mut n = 1i64;
    for x in 0..l {
        for y in 0..l {
            if (y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6).rem_euclid(l) == 0 {
                n += 1;
            }
        }
    }
    ell as i64 + 1 - n
}

fn sample_t() -> Vec<Rat> {
    [(2, 1), (-1, 1), (1, 3), (9, 7), (-4, 5), (5, 1), (-7, 2), (3, 8)].iter().map(|&(n, d)| rat(n, d)).collect()
}

#[test]
fn family_disc_and_j_formulas() {
    for f in ALL_FAMILIES {
        for t in sample_t() {
            let e = f.model(&t).unwrap();
            assert_eq!(e.discriminant(), disc_oracle(&e), "{} {}", f, t);
            assert_eq!(f.disc_formula(&t), disc_oracle(&e), "{} {}", f, t);
            assert_eq!(f.j_formula(&t), j_oracle(&e), "{} {}", f, t);
            assert_eq!(e.j_invariant(), j_oracle(&e));
        }
    }
}

#[test]
fn t64_nominal_discriminant_is_off_by_2_24() {
    let t = rat(3, 1);
    let e = Family::T64.model(&t).unwrap();
    let ratio = Family::T64.nominal_disc_formula(&t) / disc_oracle(&e);
    assert_eq!(ratio, Rat::from_integer(BigInt::from(2).pow(24)));
    for f in ALL_FAMILIES.iter().filter(|f| **f != Family::T64) {
        assert_eq!(f.nominal_disc_formula(&t), f.disc_formula(&t));
    }
}

#[test]
fn degenerate_points() {
    for f in ALL_FAMILIES {
        assert_eq!(f.model(&Rat::one()), Err(EllipticError::Singular), "{}", f);
    }
    // The supposedly singular fiber at t = −1 of the last family is smooth.
    assert!(Family::E3p3.model(&rat(-1, 1)).is_ok());
    assert!(EllipticCurveQ::from_ints([0, 0, 0, 0, 0]).is_err());
}

#[test]
fn point_counts_match_naive_count() {
    for f in ALL_FAMILIES {
        for t in sample_t() {
            let e = f.model(&t).unwrap();
            let m = e.integral_model();
            for ell in primes(5, 60) {
                if let Ok(a) = e.ap(ell) {
                    assert!(hasse_ok(a, ell));
                    assert_eq!(a, ap_oracle(&m, ell), "{} t={} ell={}", f, t, ell);
                }
            }
        }
    }
}

#[test]
fn tate_on_known_curves() {
    // (a-invariants, [(p, f_p)])
    let table: &[([i64; 5], &[(u64, u32)])] = &[
        ([0, -1, 1, -10, -20], &[(11, 1), (2, 0), (3, 0)]),
        ([0, 0, 1, -1, 0], &[(37, 1), (2, 0)]),
        ([0, 0, 0, -1, 0], &[(2, 5), (3, 0)]),
        ([0, 0, 0, 0, 1], &[(2, 2), (3, 2)]),
        ([0, 0, 1, 0, 0], &[(3, 3), (2, 0)]),
        ([1, 0, 1, 4, -6], &[(2, 1), (7, 1), (3, 0)]),
        ([1, 1, 1, -10, -10], &[(3, 1), (5, 1), (2, 0)]),
        ([0, -1, 0, -4, 4], &[(2, 3), (3, 1)]),
        ([0, 0, 0, 1, 0], &[(2, 6)]),
        ([0, 0, 0, 0, -2], &[(2, 6), (3, 3)]),
    ];
    for (a, fs) in table {
        let e = EllipticCurveQ::from_ints(*a).unwrap();
        for &(p, f) in *fs {
            assert_eq!(tate_conductor_exponent(&e, p).0, f, "{:?} at {}", a, p);
        }
    }
    let e = EllipticCurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
    let t = tate(&e.integral_model(), 11);
    assert_eq!(t.kodaira, Kodaira::In(5));
    assert_eq!(t.min_disc_valuation, 5);
    let t = tate(&EllipticCurveQ::from_ints([0, 0, 1, -1, 0]).unwrap().integral_model(), 37);
    assert_eq!(t.kodaira, Kodaira::In(1));
}

#[test]
fn tate_reduces_nonminimal_models() {
    // 11a1 scaled by u = 2 and u = 3.
    for u in [2i64, 3, 6] {
        let a = [0, -u * u, u * u * u, -10 * u.pow(4), -20 * u.pow(6)];
        let e = EllipticCurveQ::from_ints(a).unwrap();
        for p in [2u64, 3, 11] {
            let t = tate(&e.integral_model(), p);
            assert_eq!(t.conductor_exponent, (p == 11) as u32);
        }
        assert_eq!(e.ap(13).unwrap(), ap_oracle(&EllipticCurveQ::from_ints([0, -1, 1, -10, -20]).unwrap().integral_model(), 13));
    }
}

#[test]
fn legendre_lemma_agrees_with_tate() {
    let mut seen = std::collections::BTreeSet::new();
    for num in -90i64..=90 {
        for den in [1i64, 2, 3, 4, 5, 8, 16, 32, 64, 128, 7, 9] {
            let t = rat(num, den);
            if t.is_zero() || t.is_one() {
                continue;
            }
            let (f, branch) = legendre_conductor2_branch(&t).unwrap();
            let e = Family::Legendre.model(&t).unwrap();
            assert_eq!(f, tate_conductor_exponent(&e, 2).0, "t0 = {}", t);
            seen.insert(branch);
        }
    }
    assert_eq!(seen.len(), LEGENDRE2_BRANCHES.len());
    assert!(legendre_conductor2(&Rat::zero()).is_err());
    assert!(legendre_conductor2(&Rat::one()).is_err());
}

#[test]
fn legendre_sign_at_five() {
    let e = Family::Legendre.model(&rat(2, 1)).unwrap();
    assert_eq!(e.ap(5).unwrap(), -2);
    assert_eq!(LEGENDRE_EPSILON, 1);
    let rep = verify_rational_hgm(Family::Legendre, &rat(2, 1), &[5]).unwrap();
    assert_eq!(rep.rows[0].trace, "-2");
}

#[test]
fn every_family_matches_its_curve() {
    for f in ALL_FAMILIES {
        for t in [rat(2, 1), rat(1, 3), rat(-4, 5)] {
            let rep = verify_rational_hgm(f, &t, &primes(5, 400)).unwrap();
            assert!(rep.rows.len() >= 10, "{} {}", f, t);
            assert!(rep.all_equal, "{} {}: {:?}", f, t, rep);
        }
    }
}

#[test]
fn report_skips_are_labelled() {
    let rep = verify_rational_hgm(Family::T27, &rat(2, 1), &primes(2, 40)).unwrap();
    for (q, why) in &rep.skipped {
        assert!(*q < 5 || (q - 1) % 3 != 0 || why.starts_with("bad prime"), "{} {}", q, why);
    }
    assert!(rep.rows.iter().all(|r| (r.q - 1) % 3 == 0));
}

/// Solution with α = 2, β = γ = A = C = 1, B chosen to balance.
fn frey_sample(f: Family, p: u32) -> FreyInput {
    let [i, _, _] = f.fermat_exponents(p);
    let b = 1 - 2i64.pow(i);
    FreyInput::from_ints([1, b, 1, 2, 1, 1])
}

/// The family j at t0 = Aα^p/(Cγ^k), using t0 − 1 = −Bβ^p/(Cγ^k).
fn corrected_frey_j(f: Family, s: &FreyInput, p: u32) -> Rat {
    let r = |x: BigInt| Rat::from_integer(x);
    let (a, b, c, al, be, ga) = (&s.a, &s.b, &s.c, &s.alpha, &s.beta, &s.gamma);
    match f {
        Family::T27 => {
            let x: BigInt = 8 * a * al.pow(p) - 9 * c * ga.pow(3);
            -r(27 * c * ga.pow(3) * x.pow(3)) / r(a.pow(3) * b * al.pow(3 * p) * be.pow(p))
        }
        Family::T64 => {
            let x: BigInt = 3 * a * al.pow(p) - 4 * c * ga * ga;
            -r(64 * x.pow(3)) / r(a * a * b * al.pow(2 * p) * be.pow(p))
        }
        _ => unreachable!(),
    }
}

#[test]
fn frey_curves() {
    for f in ALL_FAMILIES {
        for p in [5u32, 7, 11] {
            let s = frey_sample(f, p);
            assert!(s.satisfies(f, p));
            let e = frey_curve(f, &s, p).unwrap();
            let d = disc_oracle(&e);
            assert_eq!(frey_disc_formula(f, &s, p), d, "{} p={}", f, p);
            let j = j_oracle(&e);
            match frey_j_formula(f, &s, p) {
                Some(nominal) if matches!(f, Family::T27 | Family::T64) => {
                    assert_ne!(nominal, j);
                    assert_eq!(j, corrected_frey_j(f, &s, p));
                }
                Some(nominal) => assert_eq!(nominal, j, "{} p={}", f, p),
                None => {}
            }
        }
        let mut bad = frey_sample(f, 5);
        bad.gamma += 1;
        assert_eq!(frey_curve(f, &bad, 5), Err(EllipticError::NotASolution));
    }
}

#[test]
fn parsing() {
    for f in ALL_FAMILIES {
        assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
    }
    assert!("t99".parse::<Family>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn hasse_and_integral_model(fi in 0usize..6, n in -50i64..50, d in 1i64..20, ell in prop::sample::select(vec![5u64, 7, 11, 13, 17, 19, 23])) {
        let t = rat(n, d);
        prop_assume!(!t.is_zero() && !t.is_one());
        let f = ALL_FAMILIES[fi];
        let e = f.model(&t).unwrap();
        let m = e.integral_model();
        // integral model is isomorphic over Q
        prop_assert_eq!(m.to_curve().j_invariant(), e.j_invariant());
        if let Ok(a) = e.ap(ell) {
            prop_assert!(hasse_ok(a, ell));
            // twist-invariant: a_ℓ² is unchanged by rescaling
            prop_assert_eq!(a * a, ap_oracle(&m, ell).pow(2));
        }
    }

    #[test]
    fn quadratic_twist_flips_sign(n in -30i64..30, d in prop::sample::select(vec![-1i64, 2, 3, -3]), ell in prop::sample::select(vec![5u64, 7, 11, 13, 17])) {
        let t = rat(n, 1);
        prop_assume!(!t.is_zero() && !t.is_one());
        let e = Family::Legendre.model(&t).unwrap();
        let k = Rat::from_integer(d.into());
        let tw = EllipticCurveQ::new(Rat::zero(), &e.a2 * &k, Rat::zero(), &e.a4 * &k * &k, Rat::zero()).unwrap();
        if let (Ok(a), Ok(b)) = (e.ap(ell), tw.ap(ell)) {
            prop_assert_eq!(b, legendre(d, ell) * a);
        }
    }
}
