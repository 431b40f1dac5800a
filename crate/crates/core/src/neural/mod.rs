//! Dense feedforward classifier used as a feature-weight refiner: importance
//! scaled Glorot initialization, mini-batch training with early stopping,
//! GP-guided hyperparameter search and saliency extraction.

mod network;
mod search;
mod train;

pub use network::{
    extract_feature_weights, forward, init_custom, loss_and_gradients, Activation, Layer,
    LayerGrad, NetworkParams, NetworkSpec, Optimizer, TrainingLog, LOGIT_CLAMP,
};
pub use search::{
    cv_auc, hyperparameter_search, Candidate, Evaluation, SearchResult, SearchSpace, SearchStrategy,
};
pub use train::{train, PATIENCE};
