//! Responder classifiers: weighted SVMs, logistic/neural models, and the
//! T-learner baseline, plus model selection and persistence.

pub mod classifier;
pub mod cv;
pub mod kernel;
pub mod mlp;
pub mod model_io;
pub mod protocol;
pub mod scorer;
pub mod svm;
pub mod tlearner;

pub use classifier::{cate, predict, Classify, OutcomeModel, ResponderClassifier};
pub use cv::{cross_validate, cross_validate_with, CvResult, Fold, Regularized};
pub use kernel::{GramMatrix, KernelSpec};
pub use mlp::{Head, MlpScorer, Objective, TrainConfig};
pub use protocol::{fit, FitReport, LearnerConfig, LearnerKind, SvmSetting};
pub use scorer::{KernelScorer, LinearScorer, Scorer};
pub use svm::{train_respsvm, SvmFit, SvmParams};
pub use tlearner::{train_tlearner_lr, TLearnerFit};
