use skewguard::classify::ClassifyError;
use skewguard::dataio::DataError;
use skewguard::mcd::McdError;
use skewguard::metrics::MetricsError;
use skewguard::numkit::NumError;
use skewguard::resample::ResampleError;
use skewguard::simbench::SimError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Resample(#[from] ResampleError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Config(_) => "Config",
            CliError::Data(e) => data_category(e),
            CliError::Resample(e) => match e {
                ResampleError::InvalidConfig(_) => "InvalidConfig",
                ResampleError::NoMinority => "NoMinority",
                ResampleError::EmptyInlierSet => "EmptyInlierSet",
                ResampleError::DegenerateMinority { .. } => "DegenerateMinority",
                ResampleError::ZeroVarianceColumn(_) => "ZeroVarianceColumn",
                ResampleError::Mcd(e) => mcd_category(e),
                ResampleError::Data(e) => data_category(e),
                ResampleError::Numeric(e) => num_category(e),
            },
            CliError::Classify(e) => match e {
                ClassifyError::DimensionMismatch { .. } => "DimensionMismatch",
                ClassifyError::TooFewRows { .. } => "TooFewRows",
                ClassifyError::SingularInformation => "SingularInformation",
            },
            CliError::Metrics(e) => match e {
                MetricsError::LengthMismatch { .. } => "LengthMismatch",
                MetricsError::OneClassOnly => "OneClassOnly",
                MetricsError::NoPositives => "NoPositives",
                MetricsError::NonBinaryLabel(_) => "NonBinaryLabel",
                MetricsError::NonFiniteScore(_) => "NonFiniteScore",
            },
            CliError::Sim(e) => match e {
                SimError::InvalidDimension(_) => "InvalidDimension",
                SimError::InvalidSpec(_) => "InvalidSpec",
                SimError::TooFewRows(_) => "TooFewRows",
                SimError::TooManyFailures { .. } => "TooManyFailures",
                SimError::TestPartitionChanged => "TestPartitionChanged",
                SimError::Data(e) => data_category(e),
                SimError::Numeric(e) => num_category(e),
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Data(e) => data_exit(e),
            CliError::Resample(e) => match e {
                ResampleError::InvalidConfig(_) => EXIT_USAGE,
                ResampleError::Data(e) => data_exit(e),
                ResampleError::NoMinority
                | ResampleError::DegenerateMinority { .. }
                | ResampleError::ZeroVarianceColumn(_) => EXIT_DATA,
                ResampleError::EmptyInlierSet | ResampleError::Mcd(_) | ResampleError::Numeric(_) => EXIT_NUMERIC,
            },
            CliError::Classify(ClassifyError::DimensionMismatch { .. } | ClassifyError::TooFewRows { .. }) => EXIT_DATA,
            CliError::Classify(_) => EXIT_NUMERIC,
            CliError::Metrics(MetricsError::NonFiniteScore(_)) => EXIT_NUMERIC,
            CliError::Metrics(_) => EXIT_DATA,
            CliError::Sim(e) => match e {
                SimError::InvalidDimension(_) | SimError::InvalidSpec(_) => EXIT_USAGE,
                SimError::TooFewRows(_) => EXIT_DATA,
                SimError::Data(e) => data_exit(e),
                SimError::TooManyFailures { .. } | SimError::TestPartitionChanged | SimError::Numeric(_) => {
                    EXIT_NUMERIC
                }
            },
        }
    }
}

fn data_category(e: &DataError) -> &'static str {
    match e {
        DataError::Parse { .. } => "Parse",
        DataError::MissingValue { .. } => "MissingValue",
        DataError::NonBinaryLabel(_) => "NonBinaryLabel",
        DataError::MissingColumn(_) => "MissingColumn",
        DataError::ZeroScaleColumn(_) => "ZeroScaleColumn",
        DataError::DimensionMismatch { .. } => "DimensionMismatch",
        DataError::MinorityNotSmaller { .. } => "MinorityNotSmaller",
        DataError::OneClassOnly => "OneClassOnly",
        DataError::Io { .. } => "Io",
        DataError::Numeric(e) => num_category(e),
    }
}

fn data_exit(e: &DataError) -> i32 {
    match e {
        DataError::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn mcd_category(e: &McdError) -> &'static str {
    match e {
        McdError::TooFewRows { .. } => "TooFewRows",
        McdError::SingularData { .. } => "SingularData",
        McdError::DegenerateSubset => "DegenerateSubset",
        McdError::InvalidAlpha(_) => "InvalidAlpha",
        McdError::Numeric(e) => num_category(e),
    }
}

fn num_category(e: &NumError) -> &'static str {
    match e {
        NumError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
        NumError::SingularMatrix { .. } => "SingularMatrix",
        NumError::DimensionMismatch { .. } => "DimensionMismatch",
        NumError::NotSymmetric => "NotSymmetric",
        NumError::InvalidProbability(_) => "InvalidProbability",
        NumError::InvalidDegreesOfFreedom => "InvalidDegreesOfFreedom",
    }
}
