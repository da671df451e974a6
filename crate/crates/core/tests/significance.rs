use tactile_core::dataset::{ContactMode, Task};
use tactile_core::features::extract_dataset;
use tactile_core::simulator::{generate_corpus, SimConfig};
use tactile_core::stats::significance_profile;

fn profile(task: Task, mode: ContactMode) -> (Vec<String>, Vec<f64>) {
    let corpus = generate_corpus(task, mode, 60, &SimConfig::default(), 7).unwrap();
    let p = significance_profile(&extract_dataset(&corpus).unwrap()).unwrap();
    (p.feature_names, p.average_p)
}

#[test]
fn texture_fundamental_band_separates_classes() {
    for mode in [ContactMode::Flexion, ContactMode::Abduction] {
        let (names, p) = profile(Task::Texture, mode);
        assert_eq!(p.len(), 91);
        assert_eq!(p[0], 1.0, "{mode}: DC must carry no information");
        // 1.00 Hz to 6.33 Hz covers every preset fundamental and its first
        // harmonic at 15 mm/s
        for k in 3..=19 {
            assert!(p[k] < 0.05, "{mode} {}: {}", names[k], p[k]);
        }
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn stiffness_features_are_all_significant() {
    for mode in [ContactMode::Flexion, ContactMode::Abduction] {
        let (names, p) = profile(Task::Stiffness, mode);
        assert_eq!(names, ["slope", "intercept", "r"]);
        for (n, v) in names.iter().zip(&p) {
            assert!(*v < 0.05, "{mode} {n}: {v}");
        }
    }
}
