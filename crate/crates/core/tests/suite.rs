use irstd::detectors::{Detector, DetectorConfig};
use irstd::metrics::post::{k_max, pfa_k_curve, pixel_confusion, CurveOptions, KMaxRule};
use irstd::synth::standard_suite;
use irstd::threshold::{global_stat_threshold, LocalStatMaps};

#[test]
fn detectors_single_out_targets() {
    let cfg = DetectorConfig::default();
    for (i, scene) in standard_suite().iter().enumerate() {
        if scene.gt.targets().is_empty() {
            continue;
        }
        let near = scene.gt.union_mask().dilate(1);
        for det in Detector::BASELINES {
            let map = det.run(&scene.image, &cfg).unwrap();
            let (mut inside, mut outside) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (&v, &n) in map.samples().iter().zip(near.bits()) {
                if n {
                    inside = inside.max(v);
                } else {
                    outside = outside.max(v);
                }
            }
            assert!(inside > outside, "scene {} {det}: {inside} <= {outside}", i + 1);
        }
    }
}

#[test]
fn curves_match_recount_on_clutter_scene() {
    let scene = &standard_suite()[5];
    let cfg = DetectorConfig::default();
    let map = Detector::Log.run(&scene.image, &cfg).unwrap();
    let opts = CurveOptions {
        n_samples: 33,
        ..CurveOptions::default()
    };
    let curve = pfa_k_curve(&map, &scene.gt, &opts).unwrap();
    assert_eq!(curve.k_max, k_max(&map, &scene.gt, KMaxRule::Min).unwrap());
    for i in 0..curve.samples.len() {
        let b = global_stat_threshold(&map, curve.k_at(i)).unwrap().binary;
        assert_eq!(curve.samples[i].1, pixel_confusion(&b, &scene.gt, 1).unwrap().pfa());
    }
}

#[test]
fn raising_local_k_thins_but_keeps_false_alarms() {
    let scene = &standard_suite()[5];
    let map = Detector::Log.run(&scene.image, &DetectorConfig::default()).unwrap();
    let maps = LocalStatMaps::new(&map, 33).unwrap();
    let fp = |k: f64| {
        pixel_confusion(&maps.apply(k).binary, &scene.gt, 1)
            .unwrap()
            .n_f
    };
    let (f4, f5) = (fp(4.0), fp(5.0));
    assert!(f5 < f4 && f5 > 0, "k=4: {f4}, k=5: {f5}");
}
