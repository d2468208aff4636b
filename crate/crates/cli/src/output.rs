//! Output files that appear only once a command has fully succeeded.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// A file written to a hidden temporary next to its destination and
/// renamed into place by [`commit`]. Dropping it uncommitted removes the
/// temporary.
pub struct AtomicFile {
    dest: PathBuf,
    out: BufWriter<NamedTempFile>,
}

impl AtomicFile {
    pub fn create(dest: &Path) -> Result<Self> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = tempfile::Builder::new()
            .prefix(".csdial-")
            .suffix(".part")
            .tempfile_in(dir)
            .with_context(|| format!("cannot create output {}", dest.display()))?;
        Ok(AtomicFile {
            dest: dest.to_owned(),
            out: BufWriter::new(tmp),
        })
    }

    fn finish(self) -> Result<(NamedTempFile, PathBuf)> {
        let dest = self.dest;
        let tmp = self
            .out
            .into_inner()
            .map_err(|e| e.into_error())
            .with_context(|| format!("cannot write {}", dest.display()))?;
        tmp.as_file()
            .sync_all()
            .with_context(|| format!("cannot write {}", dest.display()))?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644))
                .with_context(|| format!("cannot write {}", dest.display()))?;
        }
        Ok((tmp, dest))
    }
}

impl Write for AtomicFile {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.out.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// Flushes every file, then renames them all into place.
pub fn commit(files: Vec<AtomicFile>) -> Result<()> {
    let done = files.into_iter().map(AtomicFile::finish).collect::<Result<Vec<_>>>()?;
    for (tmp, dest) in done {
        tmp.persist(&dest)
            .with_context(|| format!("cannot move output into place at {}", dest.display()))?;
    }
    Ok(())
}

/// Writes `contents` to `dest` atomically.
pub fn write_all(dest: &Path, contents: &[u8]) -> Result<()> {
    let mut f = AtomicFile::create(dest)?;
    f.write_all(contents)
        .with_context(|| format!("cannot write {}", dest.display()))?;
    commit(vec![f])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_files_leave_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("out.txt");
        {
            let mut f = AtomicFile::create(&dest).unwrap();
            f.write_all(b"partial").unwrap();
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);

        let mut f = AtomicFile::create(&dest).unwrap();
        f.write_all(b"done").unwrap();
        commit(vec![f]).unwrap();
        assert_eq!(fs::read(&dest).unwrap(), b"done");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
