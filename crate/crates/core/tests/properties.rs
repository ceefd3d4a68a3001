mod common;

use proptest::prelude::*;
use qcaed::baseline::sbp_inputs;
use qcaed::bpdec::{BpDecoder, DecoderConfig, Schedule, TannerGraph};
use qcaed::qccode::{extract_base, lift, BaseMatrix};
use qcaed::sim::{parse_grid, wilson_interval};
use qcaed::symbreak::is_equivariant;
use qcaed::{is_automorphism, load_standard_code, BinaryMatrix, Permutation, StandardCode};

fn dense(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(0u8..=1, n), m)
    })
}

fn matrix(max_m: usize, max_n: usize) -> impl Strategy<Value = BinaryMatrix> {
    dense(max_m, max_n).prop_map(|d| BinaryMatrix::from_dense(&d).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|m| Permutation::new(m).unwrap())
}

/// A matrix with `n` columns and two permutations of that size.
fn matrix_and_perms() -> impl Strategy<Value = (BinaryMatrix, Permutation, Permutation)> {
    (1usize..12, 1usize..16).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..=1, n), m)
                .prop_map(|d| BinaryMatrix::from_dense(&d).unwrap()),
            permutation(n),
            permutation(n),
        )
    })
}

/// Base matrix with at most one offset per cell, and its lifting factor.
fn base_matrix() -> impl Strategy<Value = (BaseMatrix, usize)> {
    (1usize..4, 2usize..6, 2usize..9).prop_flat_map(|(rows, cols, z)| {
        prop::collection::vec(prop::option::weighted(0.6, 0..z), rows * cols).prop_map(move |cells| {
            let cells = cells.into_iter().map(|c| c.into_iter().collect()).collect();
            (BaseMatrix::new(rows, cols, cells).unwrap(), z)
        })
    })
}

proptest! {
    #[test]
    fn row_add_preserves_rank_and_row_space(m in matrix(10, 20), s in 0usize..10, d in 0usize..10) {
        prop_assume!(s < m.n_rows() && d < m.n_rows() && s != d);
        let added = m.row_add(s, d).unwrap();
        prop_assert_eq!(added.rank(), m.rank());
        prop_assert!(added.same_row_space(&m).unwrap());
        prop_assert_eq!(added.row_add(s, d).unwrap(), m);
    }

    #[test]
    fn rank_agrees_with_naive(d in dense(12, 24)) {
        let m = BinaryMatrix::from_dense(&d).unwrap();
        prop_assert_eq!(m.rank(), common::naive_rank(&d, d[0].len()));
    }

    #[test]
    fn alist_round_trip(m in matrix(12, 20)) {
        prop_assert_eq!(BinaryMatrix::from_alist(&m.to_alist()).unwrap(), m);
    }

    #[test]
    fn remove_row_drops_rank_by_at_most_one(m in matrix(10, 20), idx in 0usize..10) {
        prop_assume!(idx < m.n_rows());
        let r = m.remove_row(idx).unwrap();
        prop_assert_eq!(r.n_rows() + 1, m.n_rows());
        prop_assert!(m.rank() - r.rank() <= 1);
        let appended = m.append_row(&m.row_vector(idx).unwrap()).unwrap();
        prop_assert_eq!(appended.rank(), m.rank());
    }

    #[test]
    fn syndrome_is_linear(m in matrix(8, 16), a in prop::collection::vec(0u8..=1, 16), b in prop::collection::vec(0u8..=1, 16)) {
        let n = m.n_cols();
        let (a, b) = (&a[..n], &b[..n]);
        let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x ^ y).collect();
        let expected = m.syndrome(a).unwrap().xor(&m.syndrome(b).unwrap()).unwrap();
        prop_assert_eq!(m.syndrome(&sum).unwrap(), expected);
    }

    #[test]
    fn column_permutation_composition((m, p, q) in matrix_and_perms()) {
        let pq = p.compose(&q).unwrap();
        let sequential = m.permute_columns(&p).unwrap().permute_columns(&q).unwrap();
        prop_assert_eq!(m.permute_columns(&pq).unwrap(), sequential);
        let back = m.permute_columns(&p).unwrap().permute_columns(&p.inverse()).unwrap();
        prop_assert_eq!(back, m.clone());
        prop_assert!(m.permute_columns(&Permutation::identity(m.n_cols())).unwrap() == m);
    }

    #[test]
    fn permutation_application((_, p, q) in matrix_and_perms()) {
        let v: Vec<usize> = (100..100 + p.len()).collect();
        prop_assert_eq!(p.apply_inverse(&p.apply(&v).unwrap()).unwrap(), v.clone());
        let pq = p.compose(&q).unwrap();
        prop_assert_eq!(pq.apply(&v).unwrap(), p.apply(&q.apply(&v).unwrap()).unwrap());
    }

    #[test]
    fn lifted_matrices_are_qc_invariant((base, z) in base_matrix(), d in 0usize..9) {
        let h = lift(&base, z).unwrap();
        prop_assert_eq!(extract_base(&h, z).unwrap(), base.clone());
        let p = Permutation::quasi_cyclic(d % z, z, base.cols()).unwrap();
        prop_assert!(is_equivariant(&h, &p).unwrap());
        prop_assert!(is_automorphism(&h, &p).unwrap());
        let q = Permutation::quasi_cyclic((d + 1) % z, z, base.cols()).unwrap();
        let composed = Permutation::quasi_cyclic((2 * d + 1) % z, z, base.cols()).unwrap();
        prop_assert_eq!(p.compose(&q).unwrap(), composed);
    }

    #[test]
    fn flooding_bp_is_bit_exactly_qc_equivariant(
        (base, z) in base_matrix(),
        d in 1usize..9,
        llrs in prop::collection::vec(-6.0f64..6.0, 5 * 8),
        iters in 1usize..12,
    ) {
        let h = lift(&base, z).unwrap();
        let n = h.n_cols();
        let lch = &llrs[..n];
        let p = Permutation::quasi_cyclic(d % z, z, base.cols()).unwrap();
        let graph = TannerGraph::new(&h);
        let cfg = DecoderConfig { max_iter: iters, ..DecoderConfig::default() };
        let mut dec = BpDecoder::new(&graph, cfg).unwrap();
        let plain = dec.decode(lch).unwrap();
        let shifted = dec.decode(&p.apply(lch).unwrap()).unwrap();
        prop_assert_eq!(p.apply_inverse(&shifted.hard_bits).unwrap(), plain.hard_bits.to_vec());
        let back = p.apply_inverse(&shifted.total_llr).unwrap();
        for (a, b) in back.iter().zip(&plain.total_llr) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(shifted.iterations_used, plain.iterations_used);
    }

    #[test]
    fn sbp_inputs_touch_exactly_s_positions(
        lch in prop::collection::vec(-10.0f64..10.0, 8..40),
        s in 1usize..5,
        sat in 1.0f64..100.0,
    ) {
        prop_assume!(s < lch.len());
        let inputs = sbp_inputs(&lch, s, sat).unwrap();
        prop_assert_eq!(inputs.len(), 1 << s);
        let positions: Vec<usize> = (0..lch.len())
            .filter(|&i| inputs.iter().any(|v| v[i] != lch[i]))
            .collect();
        prop_assert!(positions.len() <= s);
        for v in &inputs {
            // outside the chosen positions nothing changes
            prop_assert!((0..lch.len()).all(|i| positions.contains(&i) || v[i] == lch[i]));
            let saturated = (0..lch.len()).filter(|&i| v[i].abs() == sat && lch[i] != v[i]).count();
            prop_assert!(saturated <= s);
        }
        let magnitudes: Vec<f64> = inputs.iter().map(|v| positions.iter().map(|&i| v[i].abs()).sum()).collect();
        prop_assert!(magnitudes.iter().all(|&m| m == positions.len() as f64 * sat));
        // the least reliable position takes both signs
        let min_idx = (0..lch.len()).min_by(|&a, &b| lch[a].abs().total_cmp(&lch[b].abs())).unwrap();
        prop_assert_eq!(inputs[0][min_idx], sat);
        prop_assert_eq!(inputs[1][min_idx], -sat);
    }

    #[test]
    fn wilson_interval_brackets_estimate(k in 0usize..500, extra in 0usize..5000) {
        let n = k + extra + 1;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn grid_length(start in -2.0f64..5.0, steps in 0usize..20, step in prop::sample::select(vec![0.1, 0.25, 0.5, 1.0])) {
        let stop = start + steps as f64 * step;
        let spec = format!("{start}:{step}:{stop}");
        let grid = parse_grid(&spec).unwrap();
        prop_assert_eq!(grid.len(), steps + 1);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every row of the CCSDS matrix has even weight, so the all-ones word
    /// is a codeword and flipping every LLR sign must flip every decision.
    #[test]
    fn ccsds_negation_symmetry(seed in any::<u64>(), schedule in prop::sample::select(vec![Schedule::Flooding, Schedule::Layered])) {
        let code = load_standard_code(StandardCode::Ccsds128_64).unwrap();
        prop_assert!(code.h().rows().iter().all(|r| r.len() % 2 == 0));
        let mut rng = common::SplitMix64(seed);
        let lch: Vec<f64> = (0..code.n()).map(|_| 2.5 + 2.0 * rng.normal()).collect();
        let neg: Vec<f64> = lch.iter().map(|v| -v).collect();
        let graph = TannerGraph::new(code.h());
        let mut dec = BpDecoder::new(&graph, DecoderConfig::new(32, schedule)).unwrap();
        let a = dec.decode(&lch).unwrap();
        let b = dec.decode(&neg).unwrap();
        prop_assert_eq!(a.iterations_used, b.iterations_used);
        prop_assert_eq!(a.converged, b.converged);
        for (x, y) in a.total_llr.iter().zip(&b.total_llr) {
            prop_assert_eq!(x.to_bits(), (-y).to_bits());
        }
        for (x, y) in a.hard_bits.iter().zip(b.hard_bits.iter()) {
            prop_assert_eq!(*x ^ *y, 1);
        }
    }
}
