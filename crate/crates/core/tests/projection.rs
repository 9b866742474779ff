mod common;

use fxprobe::matrix::Matrix;
use fxprobe::projection::{
    fuzzy_graph, knn_graph, project, spectral_init, trajectory_metrics, Method, ProjectionConfig,
};
use proptest::prelude::*;

fn two_clusters() -> Vec<Vec<f64>> {
    let mut a = vec![0.0; 10];
    a[0] = 5.0;
    let mut b = vec![0.0; 10];
    b[1] = 5.0;
    common::blobs(&[a, b], 50, 1.0, 42).0
}

#[test]
fn two_cluster_trustworthiness() {
    let x = two_clusters();
    let p = project(&Matrix::from_rows(&x).unwrap(), &ProjectionConfig::default()).unwrap();
    let t = common::trustworthiness(&x, &p.points, 5);
    assert!(t >= 0.8, "trustworthiness {t}");
}

#[test]
fn zero_epochs_is_spectral_init() {
    let x = Matrix::from_rows(&two_clusters()).unwrap();
    let cfg = ProjectionConfig { n_epochs: 0, n_neighbors: 10, ..ProjectionConfig::default() };
    let p = project(&x, &cfg).unwrap();
    let init = spectral_init(&fuzzy_graph(&knn_graph(&x, 10)));
    assert_eq!(p.points, init);
}

#[test]
fn same_seed_same_layout() {
    let x = Matrix::from_rows(&two_clusters()[..40]).unwrap();
    let cfg = ProjectionConfig { n_neighbors: 8, n_epochs: 50, ..ProjectionConfig::default() };
    assert_eq!(project(&x, &cfg).unwrap(), project(&x, &cfg).unwrap());
    let pca = ProjectionConfig { method: Method::Pca, ..cfg };
    assert_eq!(project(&x, &pca).unwrap().points.len(), 40);
}

#[test]
fn trajectory_hand_values() {
    let m = trajectory_metrics(&[[0.0, 0.0], [3.0, 4.0]]);
    assert_eq!((m.length, m.straightness), (5.0, 1.0));
    let back = trajectory_metrics(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]);
    assert_eq!((back.length, back.straightness), (2.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn knn_matches_exhaustive_oracle(
        rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 5..100),
        k in 1usize..5,
    ) {
        let graph = knn_graph(&Matrix::from_rows(&rows).unwrap(), k);
        prop_assert_eq!(graph.indices, common::brute_knn(&rows, k));
    }
}
