use ostrowski::construction::{coefficient_disc_bound, triple_from};
use ostrowski::gaps::{detect_gaps, verify_gap_transfer, GapStructure, MuRule, Subsequence};
use ostrowski::series::{
    format_hex_float, parse_hex_float, recenter_coefficients, BlockSeries, Center, GaussRational, Mode, Scalar,
    SparsePolynomial,
};
use ostrowski::window::{disc_grid, solve_window, theta_fit, ApproxRequest, CompactSample, Target, ThetaEstimate, WindowSpec};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn gauss(num: i64, den: i64) -> impl Strategy<Value = GaussRational> {
    (-num..=num, 1..=den, -num..=num, 1..=den).prop_map(|(a, b, c, d)| GaussRational::new(q(a, b), q(c, d)))
}

fn sparse(max_degree: u64) -> impl Strategy<Value = SparsePolynomial> {
    proptest::collection::vec((0..=max_degree, gauss(12, 7)), 0..10).prop_map(|terms| {
        let mut p = SparsePolynomial::new(Mode::Exact);
        for (k, c) in terms {
            p.add_term(k, &Scalar::Exact(c)).unwrap();
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn evaluation_is_additive(a in sparse(30), b in sparse(30), z in gauss(9, 5)) {
        let z = Scalar::Exact(z);
        let lhs = a.add(&b).unwrap().eval(&z).unwrap();
        let rhs = a.eval(&z).unwrap().checked_add(&b.eval(&z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(a.sub(&a).unwrap().is_empty());
    }

    #[test]
    fn polynomial_json_round_trips(p in sparse(200)) {
        let json = serde_json::to_string(&p).unwrap();
        let back: SparsePolynomial = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, p.clone());
        let f = p.to_mode(Mode::float(192)).unwrap();
        let back: SparsePolynomial = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn hex_floats_round_trip(m in -1_000_000_000i64..1_000_000_000, e in -300i32..300) {
        let x = Float::with_val(256, m) * Float::with_val(256, 2).pow(e) / 3u32;
        prop_assert_eq!(parse_hex_float(&format_hex_float(&x), 256).unwrap(), x);
    }

    #[test]
    fn recentering_at_origin_is_identity(p in sparse(40)) {
        let f = BlockSeries::from_polynomial(p.clone());
        let n = p.degree().unwrap_or(0);
        let b = recenter_coefficients(&f, &Center::origin(Mode::Exact), n).unwrap();
        for (k, c) in b.iter().enumerate() {
            prop_assert_eq!(c, &p.coefficient(k as u64));
        }
    }

    #[test]
    fn detected_gaps_are_ordered_and_small(
        zeros in proptest::collection::btree_set(1u64..120, 0..80),
        eta in 0.05f64..0.9,
        rho in 1.1f64..6.0,
    ) {
        let mut p = SparsePolynomial::new(Mode::Exact);
        for k in 0..=120u64 {
            if !zeros.contains(&k) {
                p.set(k, Scalar::from_int(1, Mode::Exact)).unwrap();
            }
        }
        let g = detect_gaps(&BlockSeries::from_polynomial(p.clone()), eta, rho).unwrap();
        prop_assert!(GapStructure::new(g.pairs().to_vec()).is_ok());
        for &(a, b) in g.pairs() {
            prop_assert!(a == 0 || b as f64 >= rho * a as f64);
            for j in a + 1..=b {
                prop_assert!(p.coefficient(j).is_zero());
            }
        }
    }

    #[test]
    fn zero_gaps_transfer_exactly(lo in 2u64..30, len in 4u64..60, z in gauss(5, 2)) {
        let hi = lo + len;
        let mut p = SparsePolynomial::new(Mode::Exact);
        for k in (0..=lo).chain(hi + 1..=hi + 5) {
            p.set(k, Scalar::from_int(k as i64 + 1, Mode::Exact)).unwrap();
        }
        let f = BlockSeries::from_polynomial(p);
        let g = GapStructure::new(vec![(lo, hi)]).unwrap();
        let k = [Scalar::Exact(z)];
        for rule in [MuRule::PowersOf2, MuRule::Squares] {
            let rep = verify_gap_transfer(&f, &g, &Subsequence::Rule(rule), &k, 1e-6, 1).unwrap();
            if let Some(s) = &rep.stages[0].sup {
                prop_assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn hit_gap_is_smallest_member(p in 1u64..5000, len in 1u64..5000) {
        let mu = Subsequence::Rule(MuRule::Squares);
        let q = p + len;
        match mu.hit_gap((p, q)) {
            Some(h) => {
                prop_assert!(p <= h && h < q);
                let root = (h as f64).sqrt() as u64;
                prop_assert_eq!(root * root, h);
                prop_assert!((root - 1).pow(2) < p);
            }
            None => prop_assert!(mu.iter().all(|m| m < p || m >= q)),
        }
    }

    #[test]
    fn window_triples_bracket_the_geometric_mean(mu_n in 1u64..100_000, factor in 2u64..50) {
        let next = mu_n * factor;
        if let Ok(t) = triple_from(mu_n, next) {
            prop_assert!(t.u < t.v && t.v < t.w);
            let uw = t.u as u128 * t.w as u128;
            prop_assert!((t.v as u128).pow(2) <= uw && uw < (t.v as u128 + 1).pow(2));
        }
    }

    #[test]
    fn disc_bound_dominates_grid_values(p in sparse(25), num in 1i64..10) {
        let r = q(num, 10);
        let bound = coefficient_disc_bound(&p, &r).unwrap();
        let prec = 256;
        let limit = Float::with_val(prec, &bound) * (1 + Float::with_val(prec, 1e-60));
        for z in disc_grid(&r, 16) {
            let v = p.eval(&Scalar::Exact(z)).unwrap();
            prop_assert!(v.modulus() <= limit);
        }
    }

    #[test]
    fn geometric_errors_fit_exactly(theta in 0.1f64..0.95, c in 0.01f64..10.0) {
        let samples: Vec<(u64, Float)> =
            [3u64, 7, 12, 20].iter().map(|&t| (t, Float::with_val(128, c * theta.powi(t as i32)))).collect();
        match theta_fit(&samples).unwrap() {
            ThetaEstimate::Fitted { theta: fit, residual, .. } => {
                prop_assert!((fit - theta).abs() < 1e-9);
                prop_assert!(residual < 1e-9);
            }
            ThetaEstimate::Exact => prop_assert!(false),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solver_respects_window_scaling_and_monotonicity(
        lo in 1u64..4,
        len in 0u64..4,
        h in gauss(6, 3),
        scale in 2i64..5,
    ) {
        let k = CompactSample::new("K", vec![
            GaussRational::real(q(11, 10)), GaussRational::real(q(3, 2)), GaussRational::new(q(6, 5), q(1, 2)),
            GaussRational::new(q(6, 5), q(-1, 2)), GaussRational::real(2),
        ], true).unwrap();
        let target = SparsePolynomial::monomial(0, Scalar::Exact(h.clone()));
        let solve = |t: &SparsePolynomial, w: WindowSpec| {
            let mut req = ApproxRequest::new(Target::Polynomial(t.clone()), k.clone(), q(1, 2), w);
            req.options.disc_points = 16;
            solve_window(&req).unwrap()
        };
        let w = WindowSpec::new(lo, lo + len).unwrap();
        let res = solve(&target, w);
        if let (Some(v), Some(d)) = (res.polynomial.valuation(), res.polynomial.degree()) {
            prop_assert!(v >= w.lo && d <= w.hi);
        }
        let wider = solve(&target, WindowSpec::new(lo, lo + len + 1).unwrap());
        let slack = Float::with_val(64, 1e-30);
        prop_assert!(wider.objective <= Float::with_val(256, &res.objective + &slack));
        let scaled = target.scale(&Scalar::from_int(scale, Mode::Exact)).unwrap();
        let res_s = solve(&scaled, w);
        let ratio = Float::with_val(256, &res.objective * scale);
        let diff = Float::with_val(256, &res_s.objective - &ratio).abs();
        prop_assert!(diff <= Float::with_val(256, &ratio * 1e-20) + &slack, "{} vs {}", res_s.objective, ratio);
    }
}
