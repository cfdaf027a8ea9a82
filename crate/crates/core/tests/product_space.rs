use fbfep_core::oracle::{solve_small_inclusion, AffineMap, AffineSet};
use fbfep_core::ops::*;
use fbfep_core::product::*;
use fbfep_core::rng::{pcg32, uniform_symmetric};
use fbfep_core::splitting::{run, Algorithm, RunOptions};
use fbfep_core::{Error, PolySchedule};
use proptest::prelude::*;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = pcg32(seed);
    DenseMatrix::new(rows, cols, (0..rows * cols).map(|_| uniform_symmetric(&mut rng)).collect()).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = pcg32(seed);
    (0..n).map(|_| uniform_symmetric(&mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flatten_round_trip(x in prop::collection::vec(-9.0..9.0f64, 1..5),
                          v in prop::collection::vec(prop::collection::vec(-9.0..9.0f64, 1..4), 0..4)) {
        let p = LiftedPoint::from_parts(&x, &v);
        let sq = x.iter().map(|a| a * a).sum::<f64>() + v.iter().flatten().map(|a| a * a).sum::<f64>();
        prop_assert!((p.norm_sq() - sq).abs() <= 1e-12 * (1.0 + sq));
        let back = LiftedPoint::from_flat(p.data.clone(), p.layout.clone()).unwrap();
        prop_assert_eq!(back.into_parts(), (x, v));
    }

    #[test]
    fn product_resolvent_solves_each_block(coeffs in prop::collection::vec(0.0..5.0f64, 3),
                                           pt in prop::collection::vec(-5.0..5.0f64, 3),
                                           lambda in 0.01..3.0f64) {
        // blocks are 1-D operators t -> c t; (1 + lambda c) z = p per block
        let ops: Vec<AffineResolvent<f64>> = coeffs
            .iter()
            .map(|&c| AffineResolvent::new(DenseMatrix::from_rows(&[vec![c]]).unwrap(), vec![0.0]).unwrap())
            .collect();
        let p = LiftedPoint::from_parts(&pt[..1], &[pt[1..2].to_vec(), pt[2..].to_vec()]);
        let out = resolvent_product(lambda, &ops[0], &[&ops[1], &ops[2]], &p).unwrap();
        for i in 0..3 {
            let m = nalgebra::Matrix1::new(1.0 + lambda * coeffs[i]);
            let z = m.try_inverse().unwrap()[0] * pt[i];
            prop_assert!((out.data[i] - z).abs() <= 1e-12);
        }
    }
}

#[test]
fn composed_term_with_box_and_singleton_constraint() {
    // 0 ∈ N_[0,1](x) + ∂|x| + N_{0.5}(x), penalty B(x) = x - 0.5. The dual
    // block settles at v = 1, so the penalized fixed point is x = 0.5 - 1/beta_n.
    let half_offset = AffineOp::new(DenseMatrix::identity(1), vec![-0.5]).unwrap();
    let c = CompositeProblem::new(Box::new(BoxProx::new(1, 0.0, 1.0).unwrap()), Box::new(ZeroOp(1)), Box::new(half_offset))
        .unwrap()
        .with_term(Box::new(ConjugateProx(L1Prox { dim: 1, weight: 1.0 })), Box::new(Identity(1)))
        .unwrap();
    let oracle = solve_small_inclusion(
        &AffineMap::zero(1),
        &AffineMap::zero(1),
        Some(&AffineSet::new(&[vec![1.0]], &[0.5]).unwrap()),
        None,
    )
    .unwrap();
    let s = PolySchedule::new(0.3, 0.75, 1.0, 0.75).unwrap();
    let init = LiftedPoint::zeros(c.layout());
    let rec = alg3_run(&c, &s, &init, &RunOptions::new(500, Algorithm::FbfEp)).unwrap();
    let beta = s.eval(500).unwrap().1;
    assert!((rec.x[0] - (oracle[0] - 1.0 / beta)).abs() <= 1e-3, "{:?}", rec.x);
    assert!((rec.x[1] - 1.0).abs() <= 1e-3);

    let rec = alg3_run(&c, &s, &init, &RunOptions::new(12_000, Algorithm::FbfEp)).unwrap();
    assert!((rec.x[0] - oracle[0]).abs() <= 1e-3, "{:?}", rec.x);
}

#[test]
fn lifted_zero_is_stationary() {
    let c = CompositeProblem::new(Box::new(BoxProx::new(1, 0.0, 1.0).unwrap()), Box::new(ZeroOp(1)), Box::new(AffineOp::linear(DenseMatrix::identity(1)).unwrap()))
        .unwrap()
        .with_term(Box::new(ConjugateProx(L1Prox { dim: 1, weight: 1.0 })), Box::new(Identity(1)))
        .unwrap();
    let s = PolySchedule::new(0.3, 0.75, 1.0, 0.75).unwrap();
    let rec = alg3_run(&c, &s, &LiftedPoint::zeros(c.layout()), &RunOptions::new(100, Algorithm::FbfEp).with_history()).unwrap();
    assert!(rec.history.unwrap().xs.iter().all(|v| v == &vec![0.0, 0.0]));
}

#[test]
fn no_terms_reproduces_the_base_run_bitwise() {
    let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![-1.0, 1.0]]).unwrap();
    let k = DenseMatrix::from_rows(&[vec![1.0, 3.0]]).unwrap();
    let build = || {
        (
            AffineResolvent::new(m.clone(), vec![0.3, -0.1]).unwrap(),
            AffineOp::new(DenseMatrix::from_rows(&[vec![0.0, 0.5], vec![-0.5, 0.0]]).unwrap(), vec![0.0, 0.2]).unwrap(),
            LeastSquaresGradient::new(k.clone(), vec![2.0]).unwrap(),
        )
    };
    let (a, d, b) = build();
    let base = fbfep_core::PenaltyProblem::new(a, d, b).unwrap();
    let (a, d, b) = build();
    let c = CompositeProblem::new(Box::new(a), Box::new(d), Box::new(b)).unwrap();
    let s = PolySchedule::new(0.05, 0.75, 2.0, 0.75).unwrap();
    let opts = RunOptions::new(300, Algorithm::FbfEp).with_history();
    let direct = run(&base, &s, &[1.0, -2.0], None, &opts).unwrap();
    let lifted = alg3_run(&c, &s, &LiftedPoint::from_parts(&[1.0, -2.0], &[]), &opts).unwrap();
    let bits = |r: &fbfep_core::RunRecord<f64>| -> Vec<u64> {
        r.history.as_ref().unwrap().xs.iter().flatten().map(|v| v.to_bits()).collect()
    };
    assert_eq!(bits(&direct), bits(&lifted));
    assert_eq!(direct.z, lifted.z);
}

#[test]
fn proximal_point_when_only_f_is_present() {
    let c = alg4_build(Box::new(BoxProx::new(2, 0.0, 1.0).unwrap()), Box::new(ZeroOp(2)), Box::new(ZeroOp(2)), Vec::new()).unwrap();
    let s = PolySchedule::constant(0.7);
    let rec = alg3_run(&c, &s, &LiftedPoint::from_parts(&[3.0, -2.0], &[]), &RunOptions::new(1, Algorithm::FbfEp)).unwrap();
    assert_eq!(rec.x, vec![1.0, 0.0]);
}

#[test]
fn half_squared_norm_term_drives_iterates_to_zero() {
    let c = alg4_build(
        Box::new(ZeroProx(3)),
        Box::new(ZeroOp(3)),
        Box::new(ZeroOp(3)),
        vec![(Box::new(SquaredNormProx(3)) as Box<dyn ProxOracle<f64>>, Box::new(Identity(3)) as Box<dyn LinearMap<f64>>)],
    )
    .unwrap();
    let s = PolySchedule::constant(0.4);
    let rec = alg3_run(&c, &s, &LiftedPoint::from_parts(&[1.0, -2.0, 0.5], &[vec![0.0; 3]]), &RunOptions::new(300, Algorithm::FbfEp)).unwrap();
    let primal = &rec.x[c.layout().primal()];
    assert!(primal.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-4, "{primal:?}");
}

#[test]
fn mismatched_initial_layout_is_rejected() {
    let c = alg4_build(Box::new(ZeroProx(2)), Box::new(ZeroOp(2)), Box::new(ZeroOp(2)), Vec::new()).unwrap();
    let err = alg3_run(&c, &PolySchedule::constant(0.1), &LiftedPoint::from_parts(&[0.0], &[]), &RunOptions::new(5, Algorithm::FbfEp))
        .unwrap_err();
    assert!(matches!(err.error, Error::Parameter(_)));
}

/// The proximal scheme written out update by update, with the same
/// operation grouping as the generic step.
#[test]
fn proximal_instantiation_matches_direct_transcription() {
    let n = 8;
    let f = BoxProx::new(n, -1.0, 1.0).unwrap();
    let h = LeastSquaresGradient::new(random_matrix(4, n, 1), random_vec(4, 2)).unwrap();
    let psi = LeastSquaresGradient::new(random_matrix(3, n, 3), random_vec(3, 4)).unwrap();
    let l1 = random_matrix(5, n, 5);
    let l2 = random_matrix(6, n, 6);
    let g1 = L1Prox { dim: 5, weight: 0.8 };
    let g2 = SquaredNormProx(6);
    let c = alg4_build(
        Box::new(f),
        Box::new(h.clone()),
        Box::new(psi.clone()),
        vec![(Box::new(g1), Box::new(l1.clone())), (Box::new(g2), Box::new(l2.clone()))],
    )
    .unwrap();
    let x0 = random_vec(n, 7);
    let v0 = [random_vec(5, 8), random_vec(6, 9)];
    let s = PolySchedule::new(0.2, 0.75, 2.0, 0.75).unwrap();
    let steps = 50;
    let rec = alg3_run(&c, &s, &LiftedPoint::from_parts(&x0, &v0), &RunOptions::new(steps, Algorithm::FbfEp).with_history()).unwrap();
    let hist = rec.history.unwrap();

    let ls = [&l1, &l2];
    let dual = |x: &[f64], q: &[Vec<f64>; 2]| -> Vec<f64> {
        let mut d = h.eval(x);
        for (l, qi) in ls.iter().zip(q) {
            let t = l.adjoint(qi);
            for k in 0..n {
                d[k] += t[k];
            }
        }
        d
    };
    let (mut x, mut v) = (x0.clone(), v0.clone());
    let (mut y_prev, mut q_prev) = (x0.clone(), v0.clone());
    for step in 0..steps {
        let (lam, beta) = s.eval(step + 1).unwrap();
        let lb = lam * beta;
        let d_prev = dual(&y_prev, &q_prev);
        let psi_prev = psi.eval(&y_prev);
        let arg: Vec<f64> = (0..n).map(|k| x[k] - lam * d_prev[k] - lb * psi_prev[k]).collect();
        let y = f.prox(lam, &arg);
        let mut q: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let gs: [&dyn ProxOracle<f64>; 2] = [&g1, &g2];
        for i in 0..2 {
            let ly = ls[i].apply(&y_prev);
            let a: Vec<f64> = v[i].iter().zip(&ly).map(|(vi, li)| vi + lam * li).collect();
            q[i] = moreau_conjugate_prox(gs[i], lam, &a).unwrap();
        }
        let d_new = dual(&y, &q);
        let psi_new = psi.eval(&y);
        let x_next: Vec<f64> =
            (0..n).map(|k| lb * (psi_prev[k] - psi_new[k]) + lam * (d_prev[k] - d_new[k]) + y[k]).collect();
        let mut v_next: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            let (ly_new, ly_old) = (ls[i].apply(&y), ls[i].apply(&y_prev));
            v_next[i] = (0..q[i].len()).map(|k| lam * (ly_new[k] - ly_old[k]) + q[i][k]).collect();
        }
        x = x_next;
        v = v_next;
        y_prev = y;
        q_prev = q;

        let lifted = LiftedPoint::from_flat(hist.xs[step + 1].clone(), c.layout()).unwrap();
        let expect = LiftedPoint::from_parts(&x, &v);
        let bits = |p: &LiftedPoint<f64>| p.data.iter().map(|t| t.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&lifted), bits(&expect), "step {step}");
    }
}
