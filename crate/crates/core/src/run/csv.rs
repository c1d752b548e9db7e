use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV file written to a temporary sibling and renamed into place on
/// [`CsvWriter::finish`].
pub struct CsvWriter {
    tmp: PathBuf,
    target: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(target: &Path) -> io::Result<Self> {
        let name = target
            .file_name()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
        let mut tmp_name = std::ffi::OsString::from(".");
        tmp_name.push(name);
        tmp_name.push(format!(".{}.tmp", std::process::id()));
        let tmp = target.with_file_name(tmp_name);
        let out = BufWriter::new(File::create(&tmp)?);
        Ok(Self {
            tmp,
            target: target.to_path_buf(),
            out,
        })
    }

    /// Writes `# line` for every line of `text`.
    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        for line in text.lines() {
            writeln!(self.out, "# {line}")?;
        }
        Ok(())
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> io::Result<()> {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()?;
        self.out.get_ref().sync_all()?;
        std::fs::rename(&self.tmp, &self.target)
    }
}
