use std::fmt;
use std::process::ExitCode;

use fisherlens::cascade::CascadeError;
use fisherlens::dataset::DatasetError;
use fisherlens::eval::EvalError;
use fisherlens::fisherface::FisherError;
use fisherlens::imgproc::ImageError;

pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const EMPTY: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: IO, message: message.into() }
    }

    pub fn empty(message: impl Into<String>) -> Self {
        CliError { code: EMPTY, message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn cascade_code(e: &CascadeError) -> u8 {
    match e {
        CascadeError::Io { .. } => IO,
        CascadeError::File { source, .. } => cascade_code(source),
        _ => USAGE,
    }
}

fn image_code(e: &ImageError) -> u8 {
    match e {
        ImageError::Io(_) => IO,
        _ => USAGE,
    }
}

fn dataset_code(e: &DatasetError) -> u8 {
    match e {
        DatasetError::Io { .. } => IO,
        DatasetError::Empty | DatasetError::NoFaces { .. } => EMPTY,
        DatasetError::Cascade(c) => cascade_code(c),
        _ => USAGE,
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        CliError { code: cascade_code(&e), message: e.to_string() }
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        CliError { code: image_code(&e), message: e.to_string() }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError { code: dataset_code(&e), message: e.to_string() }
    }
}

impl From<FisherError> for CliError {
    fn from(e: FisherError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::Image { source, .. } => image_code(source),
            EvalError::Dataset(d) => dataset_code(d),
            _ => USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}
