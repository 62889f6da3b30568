use thiserror::Error;

/// Best-so-far state carried out of an optimisation that ran out of budget.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialOptimum {
    pub value: u64,
    pub optima: Vec<Vec<f64>>,
    pub evaluations: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate direction (norm {norm:e})")]
    DegenerateDirection { norm: f64 },

    #[error("numerical evaluation failed: {0}")]
    Numerical(String),

    #[error("quadrature did not converge (last relative change {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("multitype analysis failed at order {order}: {reason}")]
    Analysis { order: u32, reason: String },

    #[error("flag of zero subspaces not exhausted by order {max_order}")]
    FiniteType { max_order: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("evaluation budget of {budget} exhausted (best value so far {})", best.value)]
    BudgetExhausted { budget: usize, best: Box<PartialOptimum> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
