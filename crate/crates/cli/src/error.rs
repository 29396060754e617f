use driven_hydrogen::floquet::FloquetError;
use driven_hydrogen::propagator::PropagatorError;
use driven_hydrogen::quantizer::QuantizerError;
use driven_hydrogen::secular::SecularError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<SecularError> for CliError {
    fn from(e: SecularError) -> Self {
        match e {
            SecularError::InvalidConfig(_) => CliError::Config(e.to_string()),
            SecularError::Domain(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<QuantizerError> for CliError {
    fn from(e: QuantizerError) -> Self {
        match e {
            QuantizerError::Config(c) => c.into(),
            QuantizerError::InvalidScan(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FloquetError> for CliError {
    fn from(e: FloquetError) -> Self {
        match e {
            FloquetError::Config(c) => c.into(),
            FloquetError::InvalidBasis(_)
            | FloquetError::BasisTooLarge { .. }
            | FloquetError::TargetOutOfRange { .. }
            | FloquetError::InvalidGrid(_)
            | FloquetError::InvalidReference(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PropagatorError> for CliError {
    fn from(e: PropagatorError) -> Self {
        match e {
            PropagatorError::Config(c) => c.into(),
            PropagatorError::Floquet(f) => f.into(),
            PropagatorError::Quantizer(q) => q.into(),
            PropagatorError::Schedule(_)
            | PropagatorError::InvalidOptions(_)
            | PropagatorError::FieldTooStrong { .. }
            | PropagatorError::LandauZener(_)
            | PropagatorError::InvalidState(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}
