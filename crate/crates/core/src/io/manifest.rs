//! Corpus manifest (JSON). Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Source;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: String,
    pub feature_path: PathBuf,
    pub n_frames: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub source: Source,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub videos: Vec<VideoEntry>,
    pub subtitle_path: PathBuf,
    #[serde(default)]
    pub annotation_paths: Vec<AnnotationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopword_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonym_path: Option<PathBuf>,
}

impl CorpusManifest {
    /// Parses a manifest, resolves its paths and checks that they exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut manifest: CorpusManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.resolve(base);
        manifest.validate()?;
        Ok(manifest)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.subtitle_path);
        for v in &mut self.videos {
            fix(&mut v.feature_path);
        }
        for a in &mut self.annotation_paths {
            fix(&mut a.path);
        }
        for p in [&mut self.lemma_path, &mut self.stopword_path, &mut self.synonym_path]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for v in &self.videos {
            if !seen.insert(v.video_id.as_str()) {
                return Err(Error::Data(format!("duplicate video id {:?}", v.video_id)));
            }
        }
        let mut paths: Vec<&Path> = vec![&self.subtitle_path];
        paths.extend(self.videos.iter().map(|v| v.feature_path.as_path()));
        paths.extend(self.annotation_paths.iter().map(|a| a.path.as_path()));
        paths.extend(
            [&self.lemma_path, &self.stopword_path, &self.synonym_path]
                .into_iter()
                .flatten()
                .map(PathBuf::as_path),
        );
        for p in paths {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("{} does not exist", p.display()),
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
