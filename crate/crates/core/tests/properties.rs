mod common;

use common::*;
use probterm::bounds::{concentration_tail, lower_expected, markov_tail, sqrt_tail, SqrtTail};
use probterm::cert::{check_db, check_ranking, check_super, theta_fixpoint, VerifyBox};
use probterm::lab::LabProcess;
use probterm::mdp::{simulate, Scheduler, SimOptions};
use probterm::prob::RngStream;
use probterm::{ExactExtReal, Rational};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn zeta_monotone_for_db(text in halve_cert(), z in 1u32..30, extra in 0u32..10) {
        let (cfg, sf) = model("halve.prog", Some("halve.dist"));
        let h = bind(&cfg, &text);
        let bx = VerifyBox::parse(PROP_BOX).unwrap();
        let a = check_db::<Rational>(&h, &q(z.into()), &cfg, &sf, &bx).unwrap();
        let b = check_db::<Rational>(&h, &q((z + extra).into()), &cfg, &sf, &bx).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert!(rb.failed <= ra.failed);
        }
    }

    #[test]
    fn delta_antitone_for_super(text in halve_cert(), d in 1u32..20, shrink in 1u32..8) {
        let (cfg, sf) = model("halve.prog", Some("halve.dist"));
        let h = bind(&cfg, &text);
        let bx = VerifyBox::parse(PROP_BOX).unwrap();
        let big = qq(d.into(), 4);
        let small = &big * qq(shrink.into(), 8);
        let a = check_super::<Rational>(&h, &big, &q(20), &cfg, &sf, &bx).unwrap();
        let b = check_super::<Rational>(&h, &small, &q(20), &cfg, &sf, &bx).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            prop_assert!(rb.failed <= ra.failed, "{}", ra.condition);
        }
    }

    /// Small integer certificates are exact in `f64`, so both routes agree
    /// row by row.
    #[test]
    fn float_and_exact_checks_agree(text in halve_cert(), eps in 1u32..4) {
        let (cfg, sf) = model("halve.prog", Some("halve.dist"));
        let h = bind(&cfg, &text);
        let bx = VerifyBox::parse(PROP_BOX).unwrap();
        let e = q(eps.into());
        let exact = check_ranking::<Rational>(&h, &e, &cfg, &sf, &bx).unwrap();
        let float = check_ranking::<f64>(&h, &e, &cfg, &sf, &bx).unwrap();
        prop_assert!(exact.exact && !float.exact);
        for (a, b) in exact.rows.iter().zip(&float.rows) {
            prop_assert_eq!((a.condition, a.checked, a.failed), (b.condition, b.checked, b.failed));
        }
    }

    #[test]
    fn markov_is_antitone_in_k(h in 0i64..500, eps in 1i64..5, k in 1u64..1000, dk in 0u64..1000) {
        let h = ExactExtReal::Finite(q(h));
        let a = markov_tail(&h, &q(eps), k).unwrap();
        let b = markov_tail(&h, &q(eps), k + dk).unwrap();
        prop_assert!(b <= a && a <= q(1));
    }

    #[test]
    fn lower_bound_antitone_in_delta(h in 0i64..500, d in 1i64..50, dd in 1i64..50) {
        let h = ExactExtReal::Finite(q(h));
        prop_assert!(lower_expected(&h, &q(d + dd)).unwrap() <= lower_expected(&h, &q(d)).unwrap());
    }

    #[test]
    fn concentration_decreases_past_validity(h in 0i64..100, zeta in 1i64..20, gap in 1u64..200, dn in 1u64..200) {
        let hh = ExactExtReal::Finite(q(h));
        let n = h as u64 + gap;
        let a = concentration_tail(&hh, &q(1), &q(zeta), n).unwrap();
        let b = concentration_tail(&hh, &q(1), &q(zeta), n + dn).unwrap();
        prop_assert!(b.tight <= a.tight && a.tight <= a.factored && a.factored <= 1.0);
    }

    #[test]
    fn sqrt_tail_is_a_probability(h in 1i64..50, d in 1i64..4, z in 1i64..4, period in 1u64..5, k in 1u64..1_000_000) {
        match sqrt_tail(&ExactExtReal::Finite(q(h)), &q(d), &q(z), period, k).unwrap() {
            SqrtTail::Bound { value, .. } => prop_assert!((0.0..=1.0).contains(&value)),
            SqrtTail::TooSmall { min_k } => prop_assert!(min_k > k),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// The empirical law of each increment matches its two-point law.
    #[test]
    fn lab_increment_laws(which in 0usize..5, n in 1u64..60, seed in any::<u64>()) {
        let p = [
            LabProcess::Nonnegativity,
            LabProcess::Cbounded,
            LabProcess::Noconcentration { alpha: 2.0 },
            LabProcess::Randomwalk,
            LabProcess::Positivity,
        ][which];
        let law = p.law(n);
        let mut rng = RngStream::new(seed, n);
        let draws = 20_000u64;
        let ups = (0..draws).filter(|_| p.draw_up(n, &mut rng)).count() as f64;
        let sigma = (law.p_up * (1.0 - law.p_up) / draws as f64).sqrt();
        prop_assert!((ups / draws as f64 - law.p_up).abs() <= 4.0 * sigma + 1e-12);
        prop_assert!(law.up > law.down);
    }

    #[test]
    fn simulated_tails_are_monotone(n in -3i64..8, seed in any::<u64>(), sched in 0usize..3) {
        let (cfg, sf) = model("halve.prog", Some("halve.dist"));
        let s = [Scheduler::AlwaysThen, Scheduler::AlwaysElse, Scheduler::Uniform][sched].clone();
        let opts = SimOptions { runs: 300, max_steps: 2_000, tails: vec![1, 5, 20, 80, 400], seed };
        let st = simulate(&cfg, &sf, &entry(&cfg, "f", n), &s, &opts).unwrap();
        prop_assert_eq!(st.terminated + st.censored, st.runs);
        prop_assert!(st.tails.windows(2).all(|w| w[0].est.p >= w[1].est.p));
        prop_assert!(st.tails.iter().all(|t| (0.0..=1.0).contains(&t.est.p)));
    }
}

#[test]
fn theta_stabilizes_monotonically() {
    for prog in ["halve.prog", "doubling.prog", "walk.prog"] {
        let cfg = probterm::cfg::build_cfg(&probterm::lang::parse(&read(prog)).unwrap()).unwrap();
        let t = theta_fixpoint(&cfg);
        assert!(t.m_star <= cfg.total_labels(), "{prog}");
        assert!(t.sizes.windows(2).all(|w| w[0] <= w[1]), "{prog}: {:?}", t.sizes);
    }
}

#[test]
fn terminal_entry_bounds_degenerate() {
    let zero = ExactExtReal::Finite(q(0));
    assert_eq!(lower_expected(&zero, &q(13)).unwrap(), q(0));
    assert_eq!(markov_tail(&zero, &q(1), 1).unwrap(), q(0));
}

#[test]
fn walk_oracle_matches_closed_form() {
    let dp = walk_survival(400);
    for (m, p) in dp.iter().enumerate() {
        let c = probterm::lab::central_binomial_tail(m as u64);
        assert!((p - c).abs() < 1e-12, "m={m}: {p} vs {c}");
    }
}

#[test]
fn all_scalar_routes_accept_halve() {
    let fx = fixture("halve.prog", Some("halve.dist"), "halve.cert");
    let bx = VerifyBox::parse("n=-100..100").unwrap();
    let exact = check_ranking::<Rational>(&fx.h, &q(1), &fx.cfg, &fx.sf, &bx).unwrap();
    let f64_ = check_ranking::<f64>(&fx.h, &q(1), &fx.cfg, &fx.sf, &bx).unwrap();
    let f32_ = check_ranking::<f32>(&fx.h, &q(1), &fx.cfg, &fx.sf, &bx).unwrap();
    assert!(exact.passed() && f64_.passed() && f32_.passed());
}
