use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("at node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("linear operator is singular: {0}")]
    Singular(String),

    #[error("quadrature cost limit exceeded: {evaluations} kernel evaluations (limit {limit})")]
    CostLimit { evaluations: f64, limit: f64 },

    #[error("could not bracket inversion at node {node} (t = {t})")]
    Bracket { node: usize, t: f64 },

    #[error("no positive solution in the search box; scan trace: {trace}")]
    NoSolution { trace: String },

    #[error("several distinct tangency solutions found: {0}")]
    MultipleSolutions(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn at_node(node: usize, source: impl Into<Error>) -> Self {
        Error::AtNode {
            node,
            source: Box::new(source.into()),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
