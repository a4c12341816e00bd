use da_thermo::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Input rejected by the schema or by a domain check; exit 2.
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    /// A computation ran but its result was rejected; exit 3.
    #[error("{module}: {msg}")]
    Numerical { module: String, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Classifies a core error raised while running `module`.
    pub fn from_core(e: CoreError, module: &str) -> Self {
        let schema = |path: &str| CliError::Schema { path: path.into(), msg: e.to_string() };
        match &e {
            CoreError::NonFinite { .. } | CoreError::DimensionMismatch { .. } => schema(module),
            CoreError::InvalidMatrix(_) | CoreError::Spectrum(_) => schema("map.matrix"),
            CoreError::Expression { .. } => schema(module),
            CoreError::Domain { name, .. } => schema(&domain_path(name, module)),
            _ => CliError::Numerical { module: module.into(), msg: e.to_string() },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Config path for a core parameter name.
fn domain_path(name: &str, module: &str) -> String {
    let p = match name {
        "eta" => "scales.eta",
        "epsilon" => "scales.epsilon",
        "delta" => "scales.delta",
        "r" => "scales.r",
        "rho" => "map.rho",
        "lambda_c" | "lambda_c_target" => "map.lambda_c",
        "q" => "map.q",
        "n_range" => "budgets.n_min",
        "t_grid" => "t_grid",
        "chi_grid" | "t_range" => "spectrum",
        "n_grid" => "ldp.n_grid",
        "alpha" => "criteria.threshold.alpha",
        "L" => "criteria.l",
        "V/range" => "criteria.delta_gap",
        "seminorm" => "criteria.delta_gap.seminorm",
        "Q/delta" => "criteria.delta_gap.q",
        "segments" => "glue.segments",
        "pseudo" => "shadow.error",
        _ => return format!("{module}.{name}"),
    };
    p.into()
}
