use lexmask_core::Error;

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotFound(_) => 2,
        Error::Malformed { .. } | Error::Utf8 { .. } => 3,
        Error::Validation(_) | Error::UnknownSeed(_) | Error::UnknownLabel(_) => 4,
        Error::Io { .. } => 1,
    }
}

/// Fails with exit status 2 unless every path exists.
pub fn require_files<'a>(paths: impl IntoIterator<Item = &'a std::path::Path>) -> lexmask_core::Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Error::NotFound(p.to_path_buf()));
        }
    }
    Ok(())
}
