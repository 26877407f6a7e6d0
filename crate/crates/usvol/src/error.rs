use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: expected 8-bit grayscale, found {color}", path.display())]
    NotGrayscale { path: PathBuf, color: String },
    #[error("frame {index} ({}): size {}x{} does not match manifest {}x{}", path.display(), found.0, found.1, expected.0, expected.1)]
    FrameDims {
        index: usize,
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("manifest declares {declared} frames but {found} were found")]
    FrameCount { declared: usize, found: usize },
    #[error("mask frame {index}: non-binary value {value} at ({x}, {y})")]
    NotBinary {
        index: usize,
        x: usize,
        y: usize,
        value: u8,
    },
    #[error("frame {frame}, stage {stage}: {source}")]
    Stage {
        frame: usize,
        stage: &'static str,
        source: usvol_core::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] usvol_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.into();
        move |source| Error::Json { path, source }
    }
}
