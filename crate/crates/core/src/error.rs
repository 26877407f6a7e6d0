use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two images (or an image and its declared geometry) disagree in size.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Pixel buffer length does not match `width * height`.
    BufferLength {
        expected: usize,
        found: usize,
    },
    /// A mask contains a value other than 0 or 255.
    NotBinary {
        x: usize,
        y: usize,
        value: u8,
    },
    InvalidParameter(&'static str),
    TooFewPoints {
        needed: usize,
        found: usize,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    /// Real-valued sample coordinate outside the lattice.
    OutOfDomain,
    /// The phantom tube leaves the frame (or its margin) at this frame.
    TubeOutOfBounds {
        frame: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::BufferLength { expected, found } => {
                write!(f, "pixel buffer has {found} bytes, expected {expected}")
            }
            Error::NotBinary { x, y, value } => {
                write!(f, "non-binary value {value} at ({x}, {y})")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::TooFewPoints { needed, found } => {
                write!(f, "need at least {needed} points, got {found}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::OutOfDomain => f.write_str("sample coordinate outside the volume"),
            Error::TubeOutOfBounds { frame } => {
                write!(f, "tube cross-section leaves the frame at frame {frame}")
            }
        }
    }
}

impl core::error::Error for Error {}
