use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{stage} failed: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: isar3d_core::CoreError,
    },
    #[error("output error: {0}")]
    Output(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Data(_) => 3,
            RunError::Pipeline { .. } | RunError::Output(_) => 4,
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(isar3d_core::CoreError) -> RunError {
        move |source| RunError::Pipeline { stage, source }
    }
}
