//! Work directory layout and stage checkpoints.
//!
//! ```text
//! work/
//!   manifest.json                 config digest, inputs, finished stages
//!   stages/extract-links.jsonl
//!   stages/filter.jsonl
//!   stages/balance/<lang>.jsonl   one file per language from here on
//!   stages/download/<lang>.jsonl
//!   ...
//!   corpus/<lang>/<sha>.pdf       payloads
//!   text/<lang>/<sha>.jsonl       tokens
//!   records.jsonl                 every selected document, final status
//!   index.jsonl                   indexed documents only
//! ```
//!
//! Every file is written to a temporary name and renamed into place, so a
//! checkpoint that exists is complete.

use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use pdfcorpus_core::lang::LangCode;
use pdfcorpus_fetch::store::write_atomic;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    ExtractLinks,
    Filter,
    Balance,
    Download,
    Scan,
    ExtractText,
    DetectLang,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::ExtractLinks,
        Stage::Filter,
        Stage::Balance,
        Stage::Download,
        Stage::Scan,
        Stage::ExtractText,
        Stage::DetectLang,
        Stage::Stats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::ExtractLinks => "extract-links",
            Stage::Filter => "filter",
            Stage::Balance => "balance",
            Stage::Download => "download",
            Stage::Scan => "scan",
            Stage::ExtractText => "extract-text",
            Stage::DetectLang => "detect-lang",
            Stage::Stats => "stats",
        }
    }

    pub fn previous(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|s| *s == self).expect("listed");
        i.checked_sub(1).map(|j| Stage::ALL[j])
    }

    /// Stages whose checkpoints are split by language.
    pub fn per_language(self) -> bool {
        matches!(
            self,
            Stage::Balance | Stage::Download | Stage::Scan | Stage::ExtractText | Stage::DetectLang
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub config_fingerprint: String,
    pub inputs: Vec<String>,
    pub completed: Vec<Stage>,
}

#[derive(Debug, Clone)]
pub struct WorkDir {
    root: PathBuf,
}

fn with_path(e: io::Error, path: &Path) -> io::Error {
    io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

impl WorkDir {
    pub fn new(root: impl Into<PathBuf>) -> WorkDir {
        WorkDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn join(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn stage_file(&self, stage: Stage, lang: Option<LangCode>) -> PathBuf {
        let dir = self.root.join("stages");
        match lang {
            Some(l) => dir.join(stage.name()).join(format!("{l}.jsonl")),
            None => dir.join(format!("{}.jsonl", stage.name())),
        }
    }

    pub fn counts_file(&self, stage: Stage) -> PathBuf {
        self.root.join("stages").join(format!("{}.counts.json", stage.name()))
    }

    pub fn records_file(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }

    pub fn index_file(&self) -> PathBuf {
        self.root.join("index.jsonl")
    }

    fn manifest_file(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn load_manifest(&self) -> io::Result<Option<Manifest>> {
        let path = self.manifest_file();
        match std::fs::read_to_string(&path) {
            Ok(s) => serde_json::from_str(&s)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(with_path(e, &path)),
        }
    }

    pub fn save_manifest(&self, m: &Manifest) -> io::Result<()> {
        self.write_json(&self.manifest_file(), m)
    }

    /// Deletes the checkpoints of `stage` and of every later stage.
    pub fn clear_from(&self, stage: Stage) -> io::Result<()> {
        for s in Stage::ALL.iter().filter(|s| **s >= stage) {
            let targets = [
                self.root.join("stages").join(s.name()),
                self.stage_file(*s, None),
                self.counts_file(*s),
            ];
            for t in targets {
                let r = if t.is_dir() {
                    std::fs::remove_dir_all(&t)
                } else {
                    std::fs::remove_file(&t)
                };
                match r {
                    Ok(()) => {}
                    Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                    Err(e) => return Err(with_path(e, &t)),
                }
            }
        }
        if stage <= Stage::DetectLang {
            for f in [self.records_file(), self.index_file()] {
                if f.exists() {
                    std::fs::remove_file(&f).map_err(|e| with_path(e, &f))?;
                }
            }
        }
        Ok(())
    }

    pub fn write_jsonl<T: Serialize>(&self, path: &Path, items: &[T]) -> io::Result<()> {
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, item)?;
            buf.write_all(b"\n")?;
        }
        write_atomic(path, &buf).map_err(|e| with_path(e, path))
    }

    pub fn read_jsonl<T: DeserializeOwned>(&self, path: &Path) -> io::Result<Vec<T>> {
        let file = std::fs::File::open(path).map_err(|e| with_path(e, path))?;
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let item = serde_json::from_str(&line).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            out.push(item);
        }
        Ok(out)
    }

    pub fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> io::Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        write_atomic(path, &buf).map_err(|e| with_path(e, path))
    }

    pub fn read_json<T: DeserializeOwned>(&self, path: &Path) -> io::Result<T> {
        let s = std::fs::read_to_string(path).map_err(|e| with_path(e, path))?;
        serde_json::from_str(&s).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_order() {
        assert_eq!(Stage::ExtractLinks.previous(), None);
        assert_eq!(Stage::Stats.previous(), Some(Stage::DetectLang));
        for w in Stage::ALL.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn jsonl_round_trip_and_clear() {
        let dir = tempfile::tempdir().unwrap();
        let w = WorkDir::new(dir.path());
        let f = w.stage_file(Stage::Download, Some(LangCode::Pl));
        w.write_jsonl(&f, &[1u32, 2, 3]).unwrap();
        assert_eq!(w.read_jsonl::<u32>(&f).unwrap(), vec![1, 2, 3]);
        let g = w.stage_file(Stage::Filter, None);
        w.write_jsonl::<u32>(&g, &[]).unwrap();
        assert!(w.read_jsonl::<u32>(&g).unwrap().is_empty());
        w.clear_from(Stage::Scan).unwrap();
        assert!(f.exists() && g.exists());
        w.clear_from(Stage::Download).unwrap();
        assert!(!f.exists() && g.exists());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let w = WorkDir::new(dir.path());
        assert_eq!(w.load_manifest().unwrap(), None);
        let m = Manifest {
            config_fingerprint: "abc".into(),
            inputs: vec!["a.cdx".into()],
            completed: vec![Stage::ExtractLinks],
        };
        w.save_manifest(&m).unwrap();
        assert_eq!(w.load_manifest().unwrap(), Some(m));
    }

    #[test]
    fn malformed_lines_name_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let w = WorkDir::new(dir.path());
        let p = dir.path().join("x.jsonl");
        std::fs::write(&p, "1\nnope\n").unwrap();
        let e = w.read_jsonl::<u32>(&p).unwrap_err();
        assert!(e.to_string().contains("x.jsonl:2"), "{e}");
    }
}
