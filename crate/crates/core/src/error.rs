use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time window: {0}")]
    InvalidWindow(String),

    #[error("site {site:?} lies outside the box of half-width {half_width}")]
    SiteOutsideBox { site: Vec<i32>, half_width: u32 },

    #[error("box mismatch: {0}")]
    BoxMismatch(String),

    #[error("geometry does not fit: {0}")]
    GeometryMisfit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed event log: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
