pub mod cluster;
pub mod eigen;
pub mod kernel;
pub mod linop;
pub mod span;

pub use cluster::{cluster, cluster_real};
pub use eigen::{eigen, eigen_dense, Eigen};
pub use kernel::{exact_kernel, exact_rank, rref, Echelon};
pub use linop::{matrix_unit, LinOp, Row};
pub use span::{in_span, SpanResult};
