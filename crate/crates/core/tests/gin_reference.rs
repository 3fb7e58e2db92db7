//! A two-layer GIN on a three-node path, recomputed by hand.

use faithkit::models::{Classifier, GinLayer, GinParams, Readout, Switches};
use faithkit::AnnotatedGraph;

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn params(readout: Readout) -> GinParams {
    GinParams {
        layers: vec![
            GinLayer {
                eps: 0.1,
                weight: vec![vec![0.5, -0.2], vec![0.3, 0.8]],
            },
            GinLayer {
                eps: -0.2,
                weight: vec![vec![1.0, 0.4], vec![-0.6, 0.7]],
            },
        ],
        readout,
        output: vec![vec![0.9, -0.3, 0.2], vec![-0.4, 0.5, 0.1]],
        switches: Switches {
            hs: false,
            cf: true,
            er: false,
            la: true,
        },
    }
}

fn path() -> AnnotatedGraph {
    AnnotatedGraph::new(
        3,
        vec![(0, 1).into(), (1, 2).into()],
        vec![vec![1.0, 0.0], vec![0.5, -1.0], vec![-0.3, 2.0]],
    )
    .unwrap()
}

/// Embeddings written out node by node.
fn by_hand() -> [[f64; 2]; 3] {
    let x = [[1.0, 0.0], [0.5, -1.0], [-0.3, 2.0]];
    // layer 1, eps = 0.1
    let a0 = [1.1 * x[0][0] + x[1][0], 1.1 * x[0][1] + x[1][1]];
    let a1 = [1.1 * x[1][0] + x[0][0] + x[2][0], 1.1 * x[1][1] + x[0][1] + x[2][1]];
    let a2 = [1.1 * x[2][0] + x[1][0], 1.1 * x[2][1] + x[1][1]];
    let l1 = |a: [f64; 2]| [relu(0.5 * a[0] - 0.2 * a[1]), relu(0.3 * a[0] + 0.8 * a[1])];
    let h = [l1(a0), l1(a1), l1(a2)];
    // layer 2, eps = -0.2
    let b0 = [0.8 * h[0][0] + h[1][0], 0.8 * h[0][1] + h[1][1]];
    let b1 = [0.8 * h[1][0] + h[0][0] + h[2][0], 0.8 * h[1][1] + h[0][1] + h[2][1]];
    let b2 = [0.8 * h[2][0] + h[1][0], 0.8 * h[2][1] + h[1][1]];
    let l2 = |a: [f64; 2]| [relu(a[0] + 0.4 * a[1]), relu(-0.6 * a[0] + 0.7 * a[1])];
    [l2(b0), l2(b1), l2(b2)]
}

fn softmax_of(h: [f64; 2]) -> Vec<f64> {
    let logits = [
        0.9 * h[0] - 0.4 * h[1],
        -0.3 * h[0] + 0.5 * h[1],
        0.2 * h[0] + 0.1 * h[1],
    ];
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|v| v / z).collect()
}

fn close(a: &[f64], b: &[f64]) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn embeddings_match_the_written_out_recursion() {
    let got = params(Readout::Sum).embed(&path(), None, None).unwrap();
    for (row, want) in got.iter().zip(by_hand()) {
        close(row, &want);
    }
}

#[test]
fn readouts_and_node_task_match() {
    let h = by_hand();
    let g = path();
    let sum = [h[0][0] + h[1][0] + h[2][0], h[0][1] + h[1][1] + h[2][1]];
    close(params(Readout::Sum).evaluate(&g, None).unwrap().probs(), &softmax_of(sum));
    let mean = [sum[0] / 3.0, sum[1] / 3.0];
    close(params(Readout::Mean).evaluate(&g, None).unwrap().probs(), &softmax_of(mean));
    close(params(Readout::Sum).evaluate(&g, Some(1)).unwrap().probs(), &softmax_of(h[1]));
}
