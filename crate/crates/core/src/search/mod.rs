//! Incremental weighted A*: the reusable search tree and the search loop.

pub mod tree;
pub mod wastar;

pub use tree::{priority, NodeId, NodeStatus, SearchNode, SearchTree, TreeError};
pub use wastar::{search, SearchContext, SearchOutcome, SearchResult};
