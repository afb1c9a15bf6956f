//! The shipped benchmark presets parse into the experiments they describe.

use std::fs;
use std::path::Path;

use respclass::learners::LearnerKind;
use respclass_cli::commands::experiment_from_config;
use respclass_cli::config::ConfigFile;

fn load(name: &str) -> respclass::evaluation::ExperimentSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = fs::read_to_string(&path).unwrap();
    experiment_from_config(&ConfigFile::parse(&text).unwrap()).unwrap()
}

#[test]
fn full_presets_cover_every_learner() {
    for scenario in ["linear", "spherical"] {
        for d in [2, 10, 20] {
            let spec = load(&format!("{scenario}-d{d}.cfg"));
            assert_eq!(spec.d, d);
            assert_eq!(spec.n_grid.len(), 3);
            assert_eq!(spec.replications, 100);
            assert_eq!(spec.learners.len(), 6);
            assert!(!spec.learners.contains(&LearnerKind::TLearnerLr));
        }
    }
}

#[test]
fn desk_presets_are_small() {
    for name in ["desk-linear.cfg", "desk-spherical.cfg"] {
        let spec = load(name);
        assert_eq!((spec.d, spec.n_grid.as_slice(), spec.replications), (2, &[4000][..], 20));
    }
}
