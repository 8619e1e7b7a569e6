//! Desk-scale posterior classifier: mean ⊕ standard-deviation pooling over time feeding a
//! linear softmax model, trained with momentum SGD under cosine warm restarts.

mod model;
mod pool;
mod schedule;
mod train;

pub use model::{softmax, Gradient, SoftmaxModel};
pub use pool::{pool, PoolInput, PooledVector};
pub use schedule::{sgdr_lr, TrainConfig};
pub use train::{accuracy_of, score_dataset, train, Example, TrainReport};
