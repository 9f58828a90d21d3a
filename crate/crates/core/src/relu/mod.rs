//! ReLU networks as data, their algebra, payoff networks and polynomial emulation.

pub mod emulate;
pub mod net;
pub mod payoff;

pub use emulate::{polynomial_emulator, product_net, sparse_monomial_net};
pub use net::{diag_rows, identity_rows, Layer, NetMetrics, NetworkDocument, ReluNetwork};
pub use payoff::{payoff_net, PayoffConstants, PayoffSpec};
