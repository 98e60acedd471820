//! On-disk corpus: `<root>/<domain>/<arxiv_id>.json` plus `<root>/manifest.json`.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;

use super::{Article, CorpusError, CorpusManifest, Domain};

const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".corpus.lock";

pub struct CorpusStore {
    root: PathBuf,
    writer: Mutex<()>,
}

impl CorpusStore {
    /// Opens `root`, writing `manifest` if the corpus does not exist yet.
    pub fn create(root: impl Into<PathBuf>, manifest: CorpusManifest) -> Result<Self, CorpusError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CorpusError::io(&root, e))?;
        let store = Self {
            root,
            writer: Mutex::new(()),
        };
        if !store.manifest_path().exists() {
            write_json_atomic(&store.manifest_path(), &manifest)?;
        }
        Ok(store)
    }

    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CorpusError> {
        let store = Self {
            root: root.into(),
            writer: Mutex::new(()),
        };
        store.manifest()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST)
    }

    pub fn manifest(&self) -> Result<CorpusManifest, CorpusError> {
        read_json(&self.manifest_path())
    }

    pub fn article_path(&self, domain: Domain, arxiv_id: &str) -> PathBuf {
        self.root
            .join(domain.as_str())
            .join(format!("{}.json", file_stem(arxiv_id)))
    }

    /// Persists `article` and bumps its domain count in the manifest.
    ///
    /// Returns the record id `<domain>/<arxiv_id>`.
    pub fn store_article(&self, article: &Article) -> Result<String, CorpusError> {
        self.write_article(article, false)
    }

    /// Like [`store_article`](Self::store_article), additionally flagging the
    /// article as abstract-only in the manifest.
    pub fn store_abstract_only(&self, article: &Article) -> Result<String, CorpusError> {
        self.write_article(article, true)
    }

    fn write_article(&self, article: &Article, abstract_only: bool) -> Result<String, CorpusError> {
        article.validate()?;
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let _lock = self.file_lock()?;

        let id = &article.meta.arxiv_id;
        if Domain::ALL
            .iter()
            .any(|d| self.article_path(*d, id).exists())
        {
            return Err(CorpusError::Conflict(id.clone()));
        }
        let path = self.article_path(article.meta.domain, id);
        let dir = path.parent().expect("article path has a parent");
        fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
        write_json_atomic(&path, article)?;

        let mut manifest = self.manifest()?;
        *manifest.counts.entry(article.meta.domain).or_insert(0) += 1;
        if abstract_only {
            manifest.abstract_only.push(id.clone());
        }
        write_json_atomic(&self.manifest_path(), &manifest)?;
        Ok(format!("{}/{}", article.meta.domain, id))
    }

    pub fn load_article(&self, domain: Domain, arxiv_id: &str) -> Result<Article, CorpusError> {
        read_json(&self.article_path(domain, arxiv_id))
    }

    /// All articles of a domain, sorted by arxiv_id.
    pub fn load_domain(&self, domain: Domain) -> Result<Vec<Article>, CorpusError> {
        let dir = self.root.join(domain.as_str());
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut articles = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| CorpusError::io(&dir, e))? {
            let path = entry.map_err(|e| CorpusError::io(&dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                articles.push(read_json::<Article>(&path)?);
            }
        }
        articles.sort_by(|a, b| a.meta.arxiv_id.cmp(&b.meta.arxiv_id));
        Ok(articles)
    }

    fn file_lock(&self) -> Result<File, CorpusError> {
        let path = self.root.join(LOCK);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| CorpusError::io(&path, e))?;
        file.lock().map_err(|e| CorpusError::io(&path, e))?;
        Ok(file)
    }
}

/// Old-style ids such as `math/0601001` contain a slash.
fn file_stem(arxiv_id: &str) -> String {
    arxiv_id.replace('/', "_")
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| CorpusError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| CorpusError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    crate::fsio::write_atomic(path, &bytes).map_err(|e| CorpusError::io(path, e))
}
