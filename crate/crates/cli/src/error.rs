use std::process::ExitCode;

use thiserror::Error;
use vanhove::bubbles::BubbleError;
use vanhove::dispersion::DispersionError;
use vanhove::fitlab::FitError;
use vanhove::geometry::GeometryError;
use vanhove::matsubara::ThermalError;
use vanhove::quad::QuadError;
use vanhove::selfenergy::SelfEnergyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Io(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

fn thermal(e: ThermalError) -> CliError {
    match e {
        ThermalError::BosePole(_) => CliError::Numerical(format!("ThermalError::{e:?}: {e}")),
        _ => CliError::Config(format!("ThermalError::{e:?}: {e}")),
    }
}

fn quad(e: QuadError) -> CliError {
    match e {
        QuadError::NonFiniteSample { .. } => CliError::Numerical(format!("QuadError: {e}")),
        _ => CliError::Config(format!("QuadError: {e}")),
    }
}

impl From<SelfEnergyError> for CliError {
    fn from(e: SelfEnergyError) -> Self {
        match e {
            SelfEnergyError::Thermal(t) => thermal(t),
            SelfEnergyError::Quad(q) => quad(q),
            SelfEnergyError::InvalidArgument(m) => CliError::Config(format!("SelfEnergyError::InvalidArgument: {m}")),
        }
    }
}

impl From<ThermalError> for CliError {
    fn from(e: ThermalError) -> Self {
        thermal(e)
    }
}

impl From<BubbleError> for CliError {
    fn from(e: BubbleError) -> Self {
        match e {
            BubbleError::InvalidBeta(_) => CliError::Config(format!("BubbleError: {e}")),
            BubbleError::Quad(q) => quad(q),
        }
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::InvalidTheta(_) | DispersionError::NonFinite(_) | DispersionError::InvalidArgument(_) => {
                CliError::Config(format!("DispersionError: {e}"))
            }
            _ => CliError::Numerical(format!("DispersionError: {e}")),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidArgument(_) | GeometryError::InsufficientResolution { .. } => {
                CliError::Config(format!("GeometryError: {e}"))
            }
            GeometryError::Dispersion(d) => d.into(),
            _ => CliError::Numerical(format!("GeometryError: {e}")),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Config(format!("FitError: {e}"))
    }
}
