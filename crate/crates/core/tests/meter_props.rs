use harmo_core::meter::{
    analyze_meter, classify_meter_scored, classify_meter_sections, initial_pose_processing,
    segment_meter_sections,
};
use harmo_core::*;
use proptest::prelude::*;

fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

fn even(n: usize, gap: f64) -> BeatSequence<f64> {
    BeatSequence::new((0..n).map(|i| i as f64 * gap).collect(), vec![1.0; n]).unwrap()
}

#[test]
fn classify_fixtures() {
    assert_eq!(classify_meter(&bits("101010")), MeterType::Duple);
    assert_eq!(classify_meter_scored(&bits("101010")).1, 1.0);
    assert_eq!(classify_meter(&bits("100100")), MeterType::Triple);
    assert_eq!(classify_meter(&bits("1111")), MeterType::Duple);
}

#[test]
fn quadruple_layout() {
    let units = segment_meter_units(&even(8, 0.5), MeterType::Quadruple, 30.0, 1).unwrap();
    assert_eq!(units.len(), 2);
    assert_eq!(units[1].beat_indices, 4..8);
    assert_eq!(units[1].transition_beat_count, 1);
    assert_eq!(units[1].t_start, 1.5);
    assert_eq!(units[0].transition_beat_count, 0);
    assert_eq!(units[0].t_start, 0.0);
    // natural lengths 2.0 and 2.5 s; both padded to the longer
    for u in &units {
        assert!((u.t_end - u.t_start - 2.5).abs() < 1e-12);
        assert_eq!(u.temporal_indices.len(), 76);
    }
    // transition beat 3 at 1.5 s, own meter from 2.0 s: 15 frames at 30 fps
    assert_eq!(units[1].temporal_indices.iter().filter(|&&e| e).count(), 15);
    assert!(units[1].temporal_indices[..15].iter().all(|&e| e));
    assert!(units[0].temporal_indices.iter().all(|&e| !e));
}

#[test]
fn zero_transition_tiling_partitions_beats() {
    let units = segment_meter_units(&even(4, 0.5), MeterType::Duple, 10.0, 0).unwrap();
    assert_eq!(units.len(), 2);
    assert_eq!(units[0].beat_indices, 0..2);
    assert_eq!(units[1].beat_indices, 2..4);
    assert_eq!(units[0].t_start, 0.0);
    assert_eq!(units[1].t_start, 1.0);
    assert!(units.iter().all(|u| u.transition_beat_count == 0));
}

#[test]
fn single_meter_single_unit() {
    let units = segment_meter_units(&even(3, 0.4), MeterType::Triple, 25.0, 2).unwrap();
    assert_eq!(units.len(), 1);
    assert!(units[0].temporal_indices.iter().all(|&e| !e));
}

#[test]
fn too_few_beats_is_an_error() {
    let err = segment_meter_units(&even(3, 0.5), MeterType::Quadruple, 30.0, 1).unwrap_err();
    assert!(matches!(err, HarmoError::TooFewBeats { needed: 4, got: 3, .. }));
    assert!(analyze_meter(&even(1, 0.5), 30.0, 1).is_err());
    assert!(segment_meter_units(&even(4, 0.5), MeterType::Duple, 0.0, 1).is_err());
}

#[test]
fn initial_pose_fixtures() {
    let p = |x: f64| vec![vec![x, 2.0 * x]];
    let poses = PoseSequence::from_frames(30.0, &[p(1.0), p(3.0), p(10.0), p(20.0)]).unwrap();
    let out = initial_pose_processing(&poses, &[true, true, false, false]).unwrap();
    assert_eq!(out.to_nested(), vec![p(1.0), p(3.0), p(2.0), p(2.0)]);

    let same = initial_pose_processing(&poses, &[true; 4]).unwrap();
    assert_eq!(same, poses);

    let three = poses.truncated(3);
    let out = initial_pose_processing(&three, &[true, false, false]).unwrap();
    assert_eq!(out.to_nested(), vec![p(1.0); 3]);

    // no transition frames: hold the first frame
    let out = initial_pose_processing(&three, &[false; 3]).unwrap();
    assert_eq!(out.to_nested(), vec![p(1.0); 3]);

    assert!(initial_pose_processing(&three, &[true; 2]).is_err());
}

#[test]
fn unit_features_cut_and_pad() {
    let frames: Vec<Vec<Vec<f64>>> = (0..60).map(|t| vec![vec![t as f64, 0.0]]).collect();
    let poses = PoseSequence::from_frames(10.0, &frames).unwrap();
    let beats = even(8, 0.5);
    let units = segment_meter_units(&beats, MeterType::Quadruple, 10.0, 1).unwrap();
    let f = initial_pose_features(&poses, &units[1]).unwrap();
    assert_eq!(f.frame_count(), units[1].temporal_indices.len());
    // frames 15..20 are the transition; the rest hold their mean
    let nested = f.to_nested();
    assert_eq!(nested[0], vec![vec![15.0, 0.0]]);
    assert_eq!(nested[4], vec![vec![19.0, 0.0]]);
    assert!(nested[5..].iter().all(|fr| fr == &vec![vec![17.0, 0.0]]));

    let wrong_fps = PoseSequence::from_frames(25.0, &frames).unwrap();
    assert!(initial_pose_features(&wrong_fps, &units[1]).is_err());
}

#[test]
fn meter_report_shape() {
    let sal = [1.0, 0.2, 1.0, 0.2, 1.0, 0.2, 1.0, 0.2];
    let beats = BeatSequence::new((0..8).map(|i| i as f64 * 0.5).collect(), sal.to_vec()).unwrap();
    let report = analyze_meter(&beats, 30.0, 1).unwrap();
    assert_eq!(report.meter, "duple");
    assert_eq!(report.beats_per_meter, 2);
    assert_eq!(report.units.len(), 4);
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    assert_eq!(json["units"][1]["transition_beats"], 1);
    assert!(json["units"][0]["t_start"].is_number());
}

fn labels_strategy() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 2..80).prop_map(|mut v| {
        v[0] = true;
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn labels_ignore_saliency_scale(
        sal in prop::collection::vec(0.0f64..10.0, 1..60),
        exp in -8i32..8,
    ) {
        let c = 2f64.powi(exp);
        let times: Vec<f64> = (0..sal.len()).map(|i| i as f64).collect();
        let b = BeatSequence::new(times.clone(), sal.clone()).unwrap();
        let scaled = BeatSequence::new(times, sal.iter().map(|s| s * c).collect()).unwrap();
        let (l0, l1) = (label_beats(&b), label_beats(&scaled));
        prop_assert_eq!(&l0, &l1);
        prop_assert_eq!(classify_meter(&l0), classify_meter(&l1));
    }

    #[test]
    fn best_meter_beats_every_other(labels in labels_strategy()) {
        let (m, a) = classify_meter_scored(&labels);
        for other in MeterType::ALL {
            let b = harmo_core::meter::meter_agreement(&labels, other);
            prop_assert!(a >= b);
            // ties resolve toward the shorter pattern
            if b == a {
                prop_assert!(m.beats_per_meter() <= other.beats_per_meter());
            }
        }
    }

    #[test]
    fn sections_cover_all_beats(labels in labels_strategy()) {
        let sections = classify_meter_sections(&labels);
        prop_assert_eq!(sections[0].beats.start, 0);
        prop_assert_eq!(sections.last().unwrap().beats.end, labels.len());
        for w in sections.windows(2) {
            prop_assert_eq!(w[0].beats.end, w[1].beats.start);
            prop_assert_ne!(w[0].meter, w[1].meter);
        }
    }

    #[test]
    fn units_tile_without_gaps(
        gaps in prop::collection::vec(0.2f64..1.0, 1..40),
        labels in labels_strategy(),
        transition in 0usize..4,
    ) {
        let mut t = 0.3;
        let times: Vec<f64> = std::iter::once(t).chain(gaps.iter().map(|g| { t += g; t })).collect();
        let n = times.len();
        let beats = BeatSequence::new(times.clone(), vec![1.0; n]).unwrap();
        let labels = &labels[..labels.len().min(n)];
        prop_assume!(labels.len() == n);
        let sections = classify_meter_sections(labels);
        let first = sections[0].meter.beats_per_meter();
        prop_assume!(n >= first);
        let units = segment_meter_sections(&beats, &sections, 30.0, transition).unwrap();

        let mut next = 0;
        for u in &units {
            prop_assert_eq!(u.beat_indices.start, next);
            next = u.beat_indices.end;
            prop_assert_eq!(u.transition_beat_count, transition.min(u.beat_indices.start));
            prop_assert_eq!(u.t_start, times[u.beat_indices.start - u.transition_beat_count]);
        }
        prop_assert_eq!(next, n);

        let len = units[0].t_end - units[0].t_start;
        let frames = units[0].temporal_indices.len();
        for u in &units {
            prop_assert!((u.t_end - u.t_start - len).abs() < 1e-9);
            prop_assert!(u.natural_duration <= len + 1e-12);
            prop_assert_eq!(u.temporal_indices.len(), frames);
            // flags form a prefix ending where the unit's own beats start
            let k = u.temporal_indices.iter().filter(|&&e| e).count();
            prop_assert!(u.temporal_indices[..k].iter().all(|&e| e));
            let lead = times[u.beat_indices.start] - u.t_start;
            prop_assert!((k as f64 / 30.0 - lead).abs() < 1.0 / 30.0 + 1e-9);
        }
    }

    #[test]
    fn initial_pose_processing_is_idempotent(
        coords in prop::collection::vec(-3.0f64..3.0, 2 * 3 * 12),
        ti in prop::collection::vec(any::<bool>(), 12),
    ) {
        let poses = PoseSequence::from_flat(30.0, 2, 3, coords).unwrap();
        let once = initial_pose_processing(&poses, &ti).unwrap();
        let twice = initial_pose_processing(&once, &ti).unwrap();
        for (a, b) in once.coords().iter().zip(twice.coords()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for (t, &e) in ti.iter().enumerate() {
            if e {
                prop_assert_eq!(once.frame(t), poses.frame(t));
            }
        }
    }
}
