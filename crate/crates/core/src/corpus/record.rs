use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A genre label. Matching is case-insensitive and whitespace-normalized;
/// the first-seen spelling is kept for display.
#[derive(Clone, Debug)]
pub struct Genre {
    name: String,
    key: String,
}

impl Genre {
    /// Returns `None` when the label is blank.
    pub fn new(raw: &str) -> Option<Genre> {
        let name = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        if name.is_empty() {
            return None;
        }
        let key = name.to_lowercase();
        Some(Genre { name, key })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Normalized matching key.
    pub fn key(&self) -> &str {
        &self.key
    }
}

impl PartialEq for Genre {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Genre {}

impl Hash for Genre {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl PartialOrd for Genre {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Genre {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for Genre {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Genre::new(s).ok_or_else(|| Error::Config("blank genre label".into()))
    }
}

impl Serialize for Genre {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name)
    }
}

impl<'de> Deserialize<'de> for Genre {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Genre::new(&raw).ok_or_else(|| serde::de::Error::custom("blank genre label"))
    }
}

/// Whether a record's text is original or machine-translated from another language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum CorpusVariant {
    #[default]
    Native,
    TranslatedFrom(String),
}

impl fmt::Display for CorpusVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusVariant::Native => f.write_str("native"),
            CorpusVariant::TranslatedFrom(lang) => write!(f, "translated-from:{lang}"),
        }
    }
}

impl FromStr for CorpusVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("native") {
            return Ok(CorpusVariant::Native);
        }
        match s.split_once(':') {
            Some((head, lang)) if head.eq_ignore_ascii_case("translated-from") => {
                let lang = normalize_language(lang);
                if lang.is_empty() {
                    return Err(Error::Config(format!("corpus variant `{s}` has no language")));
                }
                Ok(CorpusVariant::TranslatedFrom(lang))
            }
            _ => Err(Error::Config(format!("unrecognized corpus variant `{s}`"))),
        }
    }
}

impl Serialize for CorpusVariant {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CorpusVariant {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// A language-and-provenance tag such as `PT`, `EN` or `PT←EN` (Portuguese text
/// translated from English). Experiments pair a train tag with a test tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariantTag {
    pub language: String,
    pub variant: CorpusVariant,
}

impl VariantTag {
    pub fn native(language: &str) -> Self {
        VariantTag {
            language: normalize_language(language),
            variant: CorpusVariant::Native,
        }
    }

    pub fn translated(language: &str, from: &str) -> Self {
        VariantTag {
            language: normalize_language(language),
            variant: CorpusVariant::TranslatedFrom(normalize_language(from)),
        }
    }

    pub fn is_native(&self) -> bool {
        self.variant == CorpusVariant::Native
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            CorpusVariant::Native => write!(f, "{}", self.language.to_uppercase()),
            CorpusVariant::TranslatedFrom(from) => {
                write!(f, "{}←{}", self.language.to_uppercase(), from.to_uppercase())
            }
        }
    }
}

impl FromStr for VariantTag {
    type Err = Error;

    /// Accepts `PT`, `PT←EN` and the ASCII spelling `PT<-EN`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.split_once('←').or_else(|| s.split_once("<-"));
        let tag = match split {
            Some((lang, from)) => VariantTag::translated(lang, from),
            None => VariantTag::native(s),
        };
        let valid = |code: &str| !code.is_empty() && code.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_');
        let from_ok = match &tag.variant {
            CorpusVariant::Native => true,
            CorpusVariant::TranslatedFrom(from) => valid(from),
        };
        if !valid(&tag.language) || !from_ok {
            return Err(Error::Config(format!("invalid variant tag `{s}`")));
        }
        Ok(tag)
    }
}

impl Serialize for VariantTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VariantTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn normalize_language(code: &str) -> String {
    code.trim().to_lowercase()
}

/// One song.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyricRecord {
    pub id: String,
    /// Shared by a song and its translations.
    pub source_id: String,
    #[serde(default)]
    pub artist: String,
    #[serde(default)]
    pub title: String,
    pub lyrics: String,
    #[serde(alias = "language")]
    pub declared_language: String,
    #[serde(default)]
    pub detected_language: Option<String>,
    pub genres: BTreeSet<Genre>,
    #[serde(default)]
    pub corpus_variant: CorpusVariant,
}

impl LyricRecord {
    /// Builds a validated record. `source_id` defaults to `id`.
    pub fn new(
        id: impl Into<String>,
        lyrics: impl Into<String>,
        declared_language: &str,
        genres: impl IntoIterator<Item = Genre>,
    ) -> Result<Self> {
        let id = id.into();
        let record = LyricRecord {
            source_id: id.clone(),
            id,
            artist: String::new(),
            title: String::new(),
            lyrics: lyrics.into(),
            declared_language: normalize_language(declared_language),
            detected_language: None,
            genres: genres.into_iter().collect(),
            corpus_variant: CorpusVariant::Native,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn with_artist(mut self, artist: impl Into<String>) -> Self {
        self.artist = artist.into();
        self
    }

    pub fn with_source(mut self, source_id: impl Into<String>, variant: CorpusVariant) -> Self {
        self.source_id = source_id.into();
        self.corpus_variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Config("record id is empty".into()));
        }
        if self.lyrics.trim().is_empty() {
            return Err(Error::Config(format!("record `{}` has empty lyrics", self.id)));
        }
        if self.genres.is_empty() {
            return Err(Error::Config(format!("record `{}` has no genres", self.id)));
        }
        if self.declared_language.is_empty() {
            return Err(Error::Config(format!("record `{}` has no language", self.id)));
        }
        Ok(())
    }

    pub fn variant_tag(&self) -> VariantTag {
        VariantTag {
            language: self.declared_language.clone(),
            variant: self.corpus_variant.clone(),
        }
    }

    pub fn has_genre(&self, genre: &Genre) -> bool {
        self.genres.contains(genre)
    }
}
