//! Cache scorer: cache-word scoring, gating and interpolation with a base
//! distribution, plus a mock base model and training helpers.

mod checkpoint;
pub mod mlp;
mod mock;
mod schedule;
mod scorer;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use mlp::Mlp;
pub use mock::MockBaseModel;
pub use schedule::{topic_schedule, TopicSource};
pub use scorer::{
    cache_distribution, combine, example_loss, gate, loss_and_gradients, predict, score_cache, sigmoid, train_step,
    CacheScorerParams, DecoderContext, Gradients, Prediction, ScorerDims, TrainExample,
};
