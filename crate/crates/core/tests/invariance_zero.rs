//! Ideal detector in front of a hard-masked classifier: every bound term and
//! the ID/OOD likelihood gap vanish.

use faithkit::invariance::{bound_report, lambda_topo, likelihood_gap};
use faithkit::metrics::MetricParams;
use faithkit::models::{GinParams, GroundTruthDetector, MaskingMode, ModularModel, Readout, Stage, Switches};
use faithkit::perturb::{budget_from_dataset, Family, PerturbationSpec, Side};
use faithkit::synth::{gen_split, BaseKind, DatasetConfig, FeatureMode, MotifGraphOptions};

fn model(seed: u64) -> ModularModel {
    let stage = GinParams::seeded(2, 3, 2, seed).with_readout(Readout::Mean).with_switches(Switches {
        hs: false,
        cf: true,
        er: true,
        la: true,
    });
    ModularModel::new(GroundTruthDetector::ideal(), Stage::Gin(stage), MaskingMode::HardSubgraph)
}

#[test]
fn ideal_detector_closes_the_gap() {
    let split = gen_split(&DatasetConfig {
        id_bases: vec![BaseKind::Ladder, BaseKind::Tree],
        ood_bases: vec![BaseKind::Wheel, BaseKind::CircularLadder],
        counts: [2, 9, 9],
        options: MotifGraphOptions {
            features: FeatureMode::Constant { dim: 2 },
            gt_includes_bridge: false,
        },
        seed: 4,
        ..DatasetConfig::default()
    })
    .unwrap();
    let b = budget_from_dataset(&split.id_test, 0.05).unwrap();
    let spec = PerturbationSpec::new(Side::RFixed, Family::Budget { b }).with_seed(4);
    for seed in [1, 2, 3] {
        let m = model(seed);
        assert_eq!(likelihood_gap(&m, &split.id_test, &split.ood_test).unwrap(), 0.0);
        assert_eq!(lambda_topo(m.detector.as_ref(), &split.ood_test).unwrap(), 0.0);
        let r = bound_report(&m, &split.id_test, &split.ood_test, &spec, &MetricParams::default()).unwrap();
        for v in [
            r.lhs,
            r.lambda_topo_id,
            r.lambda_topo_ood,
            r.lambda_feat_id,
            r.lambda_feat_ood,
            r.lambda_suff_id,
            r.lambda_suff_ood,
        ] {
            assert_eq!(v, 0.0, "{r:?}");
        }
        assert_eq!(r.failures, 0);
    }
}
