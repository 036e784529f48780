use std::collections::BTreeSet;

use hypermine::hypercore::{clique_adjacency, parse_hyperedge_list, to_hyperedge_list_string, weighted_adjacency, LoadOptions, WeightKind};
use hypermine::proximity::{proximity_matrix, similarity_matrix, stationary_proximity, transition_matrix};
use hypermine::vitality::{centrality, hra_centrality, CentralityOptions, Measure};
use hypermine::Hypergraph;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn build(n: usize, raw: Vec<Vec<usize>>) -> Option<Hypergraph> {
    let edges: Vec<Vec<usize>> = raw
        .into_iter()
        .map(|e| e.into_iter().map(|v| v % n).collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>())
        .filter(|e| e.len() >= 2)
        .collect();
    if edges.is_empty() {
        return None;
    }
    let used: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    let remap: Vec<usize> = {
        let mut r = vec![usize::MAX; n];
        for (new, &old) in used.iter().enumerate() {
            r[old] = new;
        }
        r
    };
    let edges = edges.into_iter().map(|e| e.into_iter().map(|v| remap[v]).collect()).collect();
    Hypergraph::new(used.len(), edges).ok()
}

fn graphs() -> impl Strategy<Value = Option<Hypergraph>> {
    (3usize..30).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(0..n, 2..6), 1..40).prop_map(move |raw| build(n, raw))
    })
}

fn dense_incidence(g: &Hypergraph) -> DMatrix<f64> {
    g.incidence().to_dense()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clique_adjacency_matches_dense(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let m = dense_incidence(&g);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            g.node_count(),
            g.degrees().iter().map(|&d| d as f64),
        ));
        let oracle = &m * m.transpose() - d;
        let a = clique_adjacency(&g);
        prop_assert!(a.is_symmetric());
        prop_assert!(a.diagonal().iter().all(|&v| v == 0.0));
        prop_assert!((a.to_dense() - oracle).amax() < 1e-12);
    }

    #[test]
    fn weighted_adjacency_matches_dense(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let m = dense_incidence(&g);
        for (kind, w) in [(WeightKind::Zhou, 0.0), (WeightKind::Ndp, 1.0)] {
            let weights = nalgebra::DVector::from_iterator(
                g.hyperedge_count(),
                g.orders().iter().map(|&k| 1.0 / (k as f64 - w)),
            );
            let oracle = &m * DMatrix::from_diagonal(&weights) * m.transpose();
            prop_assert!((weighted_adjacency(&g, kind).to_dense() - oracle).amax() < 1e-12);
        }
        // Zhou rows sum to the node degree
        let zhou = weighted_adjacency(&g, WeightKind::Zhou).row_sums();
        for (s, &d) in zhou.iter().zip(g.degrees()) {
            prop_assert!((s - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_and_proximity_conserve_mass(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        for s in transition_matrix(&g).col_sums() {
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
        for t in 1..=3 {
            let p = proximity_matrix(&g, t).unwrap();
            for (s, &k) in p.values().col_sums().iter().zip(g.orders()) {
                prop_assert!((s - k as f64).abs() < 1e-9);
            }
            prop_assert!(p.values().values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn proximity_matches_dense_products(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let m = dense_incidence(&g);
        let kinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            g.hyperedge_count(),
            g.orders().iter().map(|&k| 1.0 / k as f64),
        ));
        let dinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            g.node_count(),
            g.degrees().iter().map(|&d| 1.0 / d as f64),
        ));
        let t = &m * kinv * m.transpose() * dinv;
        let p2 = &t * &t * &m;
        prop_assert!((proximity_matrix(&g, 2).unwrap().values().to_dense() - p2).amax() < 1e-12);
    }

    #[test]
    fn degree_scaled_error_is_monotone(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let limit = stationary_proximity(&g).values().to_dense();
        let inv_d: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / d as f64).collect();
        let err = |t: usize| {
            let p = proximity_matrix(&g, t).unwrap().values().to_dense();
            let diff = p - &limit;
            (0..diff.nrows())
                .flat_map(|i| {
                    let s = inv_d[i];
                    diff.row(i).iter().map(move |v| (v * s).abs()).collect::<Vec<_>>()
                })
                .fold(0.0f64, f64::max)
        };
        let errs: Vec<f64> = (1..=12).map(err).collect();
        for w in errs.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", errs);
        }
    }

    #[test]
    fn similarity_is_symmetric_nonnegative(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let s = similarity_matrix(&proximity_matrix(&g, 1).unwrap(), &g).unwrap();
        prop_assert!(s.values().is_symmetric());
        prop_assert!(s.values().values().iter().all(|&v| v >= 0.0));
        prop_assert!(s.values().diagonal().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_form_equals_double_sum(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let p = proximity_matrix(&g, 1).unwrap();
        let dense = p.values().to_dense();
        let c = hra_centrality(&p);
        for i in 0..g.node_count() {
            let mut brute = 0.0;
            for a in 0..dense.ncols() {
                for b in 0..dense.ncols() {
                    if a != b {
                        brute += dense[(i, a)] * dense[(i, b)];
                    }
                }
            }
            prop_assert!((c.values[i] - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn hra_ranking_ignores_scaling(g in graphs(), factor in 0.01f64..100.0) {
        let Some(g) = g else { return Ok(()) };
        let p = proximity_matrix(&g, 1).unwrap();
        let base = hra_centrality(&p).values;
        let scaled = hra_centrality(&p.scaled(factor)).values;
        let order = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
            idx
        };
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a * factor * factor - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
        // equal up to ties broken by rounding
        let ob = order(&base);
        let os = order(&scaled);
        for (x, y) in ob.iter().zip(&os) {
            if x != y {
                prop_assert!((base[*x] - base[*y]).abs() <= 1e-12 * base[*x].abs().max(1.0));
            }
        }
    }

    #[test]
    fn text_round_trip(g in graphs()) {
        let Some(g) = g else { return Ok(()) };
        let text = to_hyperedge_list_string(&g);
        let (back, _) = parse_hyperedge_list(&text, LoadOptions::default()).unwrap();
        let id_sets = |h: &Hypergraph| -> Vec<BTreeSet<String>> {
            h.hyperedges().map(|e| e.iter().map(|&v| h.node_ids()[v].clone()).collect()).collect()
        };
        prop_assert_eq!(id_sets(&back), id_sets(&g));
        prop_assert_eq!(back.orders(), g.orders());
        // canonical text is a fixed point after one pass
        let once = to_hyperedge_list_string(&back);
        let (again, _) = parse_hyperedge_list(&once, LoadOptions::default()).unwrap();
        prop_assert_eq!(to_hyperedge_list_string(&again), once);
    }
}

/// Cycle of triangles: rotating node ids by 2 is an automorphism.
fn rotational() -> Hypergraph {
    let n = 12;
    let edges = (0..n / 2).map(|s| vec![2 * s, 2 * s + 1, (2 * s + 2) % n]).collect();
    Hypergraph::new(n, edges).unwrap()
}

#[test]
fn centralities_respect_automorphisms() {
    let g = rotational();
    let opts = CentralityOptions::default();
    for m in Measure::ALL {
        let c = centrality(&g, m, &opts).unwrap();
        for orbit in [(0..12).step_by(2).collect::<Vec<_>>(), (1..12).step_by(2).collect()] {
            let first = c.values[orbit[0]];
            for &v in &orbit {
                assert!(
                    (c.values[v] - first).abs() <= 1e-10 * first.abs().max(1.0),
                    "{} breaks symmetry: {:?}",
                    m.name(),
                    c.values
                );
            }
        }
        assert!(c.values.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn eigen_measures_converge_with_small_residual() {
    let g = Hypergraph::new(
        10,
        vec![vec![0, 1, 2], vec![2, 3, 4, 5], vec![5, 6], vec![6, 7, 8], vec![8, 9, 0], vec![1, 4, 7]],
    )
    .unwrap();
    let opts = CentralityOptions::default();
    for m in [Measure::Hec, Measure::Nb] {
        let c = centrality(&g, m, &opts).unwrap();
        assert!(c.diagnostics.converged);
        assert!(c.diagnostics.residual < 1e-8, "{} residual {}", m.name(), c.diagnostics.residual);
        assert!(c.values.iter().all(|&v| v >= 0.0));
        assert!((c.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
