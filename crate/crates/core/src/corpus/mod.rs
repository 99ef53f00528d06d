//! Topic ingestion: XML topic directories, tokenization, vocabulary and
//! bag-of-words matrices.
//!
//! Layout of a topic directory:
//!
//! ```text
//! <topic>/topic.xml            optional   <TOPIC category="3" word_limit="100"/>
//! <topic>/news/<docid>.xml     required   <DOC id source date><TEXT><S>..</S></TEXT></DOC>
//! <topic>/comments.xml         optional   <COMMENTS><C id><S>..</S></C></COMMENTS>
//! <topic>/summaries/<n>.xml    optional   <SUMMARY><S>..</S></SUMMARY>
//! <topic>/parses/<docid>.txt   optional   one bracketed tree per sentence line
//! ```

mod bow;
pub mod text;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

pub use bow::{vectorize, BowKind, BowMatrix};
pub use vocab::{build_vocabulary, Vocabulary};

use crate::error::{Error, Result};
use text::Token;

/// Topic categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    AccidentsAndNaturalDisasters,
    Attacks,
    NewTechnology,
    HealthAndSafety,
    EndangeredResources,
    InvestigationsAndTrials,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::AccidentsAndNaturalDisasters,
        Category::Attacks,
        Category::NewTechnology,
        Category::HealthAndSafety,
        Category::EndangeredResources,
        Category::InvestigationsAndTrials,
    ];

    pub fn number(self) -> u8 {
        Self::ALL.iter().position(|&c| c == self).unwrap() as u8 + 1
    }
}

impl FromStr for Category {
    type Err = Error;

    /// Accepts the category number (1-6) or a case-insensitive name.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(n) = s.parse::<usize>() {
            return (1..=6)
                .contains(&n)
                .then(|| Self::ALL[n - 1])
                .ok_or_else(|| Error::invalid(format!("category number {n} not in 1..=6")));
        }
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        Self::ALL
            .into_iter()
            .find(|c| format!("{c:?}").to_lowercase() == key)
            .ok_or_else(|| Error::invalid(format!("unknown category {s:?}")))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Anything made of tokens read from a raw string.
pub trait TextUnit {
    fn raw(&self) -> &str;
    fn tokens(&self) -> &[String];
    /// Byte range of each token in [`TextUnit::raw`].
    fn offsets(&self) -> &[(usize, usize)];

    fn token_spans(&self) -> Vec<Token> {
        self.tokens()
            .iter()
            .zip(self.offsets())
            .map(|(t, &(start, end))| Token {
                text: t.clone(),
                start,
                end,
            })
            .collect()
    }

    /// Candidate vocabulary terms of this unit.
    fn terms(&self) -> BTreeSet<String> {
        text::unit_terms(self.raw(), &self.token_spans())
    }

    /// Surface form of token `i` as written in the raw text.
    fn surface(&self, i: usize) -> &str {
        let (s, e) = self.offsets()[i];
        &self.raw()[s..e]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub tokens: Vec<String>,
    pub offsets: Vec<(usize, usize)>,
    pub raw: String,
    pub parse: Option<String>,
}

impl Sentence {
    /// Tokenizes `raw`; `None` when it holds no word token.
    pub fn new(doc_id: &str, index: usize, raw: &str) -> Option<Self> {
        let toks = text::tokenize(raw);
        if toks.is_empty() {
            return None;
        }
        Some(Sentence {
            doc_id: doc_id.to_string(),
            index,
            offsets: toks.iter().map(|t| (t.start, t.end)).collect(),
            tokens: toks.into_iter().map(|t| t.text).collect(),
            raw: raw.to_string(),
            parse: None,
        })
    }
}

impl TextUnit for Sentence {
    fn raw(&self) -> &str {
        &self.raw
    }
    fn tokens(&self) -> &[String] {
        &self.tokens
    }
    fn offsets(&self) -> &[(usize, usize)] {
        &self.offsets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentSentence {
    pub comment_id: String,
    /// Position of the sentence inside its comment.
    pub index: usize,
    pub tokens: Vec<String>,
    pub offsets: Vec<(usize, usize)>,
    pub raw: String,
}

impl CommentSentence {
    pub fn new(comment_id: &str, index: usize, raw: &str) -> Option<Self> {
        let s = Sentence::new(comment_id, index, raw)?;
        Some(CommentSentence {
            comment_id: s.doc_id,
            index,
            tokens: s.tokens,
            offsets: s.offsets,
            raw: s.raw,
        })
    }

    /// Stable identifier `<comment id>:<sentence index>`.
    pub fn key(&self) -> String {
        format!("{}:{}", self.comment_id, self.index)
    }
}

impl TextUnit for CommentSentence {
    fn raw(&self) -> &str {
        &self.raw
    }
    fn tokens(&self) -> &[String] {
        &self.tokens
    }
    fn offsets(&self) -> &[(usize, usize)] {
        &self.offsets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsDocument {
    pub id: String,
    pub source: String,
    /// ISO-like date string as stored in the `date` attribute.
    pub timestamp: Option<String>,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub category: Option<Category>,
    pub documents: Vec<NewsDocument>,
    pub comments: Vec<CommentSentence>,
    /// Tokenized reference summaries.
    pub model_summaries: Vec<Vec<String>>,
    pub summary_word_limit: usize,
}

pub const DEFAULT_WORD_LIMIT: usize = 100;

impl Topic {
    pub fn news_sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn news_sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn document(&self, id: &str) -> Option<&NewsDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Copy of the topic with all comments removed.
    pub fn without_comments(&self) -> Topic {
        Topic {
            comments: Vec::new(),
            ..self.clone()
        }
    }

    /// Builds a topic from in-memory texts: one string per document (split
    /// into sentences) and one string per comment.
    pub fn from_texts(id: &str, documents: &[&str], comments: &[&str]) -> Result<Topic> {
        let documents: Vec<NewsDocument> = documents
            .iter()
            .enumerate()
            .map(|(d, body)| {
                let doc_id = format!("d{d:02}");
                let sentences = sentences_from_strings(&doc_id, &text::split_sentences(body));
                NewsDocument {
                    id: doc_id,
                    source: String::new(),
                    timestamp: None,
                    sentences,
                }
            })
            .filter(|d| !d.sentences.is_empty())
            .collect();
        let comments = comments
            .iter()
            .enumerate()
            .flat_map(|(c, body)| {
                let cid = format!("c{c:03}");
                text::split_sentences(body)
                    .into_iter()
                    .enumerate()
                    .filter_map(move |(k, s)| CommentSentence::new(&cid, k, &s))
                    .collect::<Vec<_>>()
            })
            .collect();
        let topic = Topic {
            id: id.to_string(),
            category: None,
            documents,
            comments,
            model_summaries: Vec::new(),
            summary_word_limit: DEFAULT_WORD_LIMIT,
        };
        if topic.news_sentence_count() == 0 {
            return Err(Error::invalid("topic has no news sentences"));
        }
        Ok(topic)
    }
}

fn sentences_from_strings(doc_id: &str, raws: &[String]) -> Vec<Sentence> {
    raws.iter()
        .filter_map(|r| Sentence::new(doc_id, 0, r))
        .enumerate()
        .map(|(i, mut s)| {
            s.index = i;
            s
        })
        .collect()
}

fn parse_xml<'a>(file: &Path, content: &'a str) -> Result<roxmltree::Document<'a>> {
    roxmltree::Document::parse(content).map_err(|e| Error::Parse {
        file: file.to_path_buf(),
        line: e.pos().row,
        message: e.to_string(),
    })
}

fn xml_error(file: &Path, doc: &roxmltree::Document, node: roxmltree::Node, msg: &str) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line: doc.text_pos_at(node.range().start).row,
        message: msg.to_string(),
    }
}

fn element_text(node: roxmltree::Node) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<Vec<_>>()
        .join("")
}

/// Sentence strings under `node`: its `<S>` descendants when any exist,
/// otherwise the text content split into sentences.
fn sentence_strings(node: roxmltree::Node) -> Vec<String> {
    let marked: Vec<String> = node
        .descendants()
        .filter(|n| n.has_tag_name("S"))
        .map(|n| normalize_ws(&element_text(n)))
        .collect();
    if !marked.is_empty() {
        return marked;
    }
    let paragraphs: Vec<roxmltree::Node> =
        node.descendants().filter(|n| n.has_tag_name("P")).collect();
    let blocks: Vec<String> = if paragraphs.is_empty() {
        vec![element_text(node)]
    } else {
        paragraphs.into_iter().map(element_text).collect()
    };
    blocks
        .iter()
        .flat_map(|b| text::split_sentences(&normalize_ws(b)))
        .collect()
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn xml_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "xml"))
        .collect();
    files.sort();
    Ok(files)
}

fn load_document(path: &Path) -> Result<NewsDocument> {
    let content = fs::read_to_string(path)?;
    let doc = parse_xml(path, &content)?;
    let root = doc.root_element();
    if !root.has_tag_name("DOC") {
        return Err(xml_error(path, &doc, root, "expected <DOC> root element"));
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let id = root.attribute("id").unwrap_or(&stem).to_string();
    let text_node = root
        .children()
        .find(|n| n.has_tag_name("TEXT"))
        .ok_or_else(|| xml_error(path, &doc, root, "missing <TEXT> element"))?;
    let sentences = sentences_from_strings(&id, &sentence_strings(text_node));
    Ok(NewsDocument {
        source: root.attribute("source").unwrap_or_default().to_string(),
        timestamp: root.attribute("date").map(str::to_string),
        id,
        sentences,
    })
}

fn load_comments(path: &Path) -> Result<Vec<CommentSentence>> {
    let content = fs::read_to_string(path)?;
    let doc = parse_xml(path, &content)?;
    let root = doc.root_element();
    if !root.has_tag_name("COMMENTS") {
        return Err(xml_error(path, &doc, root, "expected <COMMENTS> root element"));
    }
    let mut out = Vec::new();
    for (k, c) in root.children().filter(|n| n.has_tag_name("C")).enumerate() {
        let default_id = format!("c{k}");
        let cid = c.attribute("id").unwrap_or(&default_id);
        out.extend(
            sentence_strings(c)
                .iter()
                .filter_map(|s| CommentSentence::new(cid, 0, s))
                .enumerate()
                .map(|(i, mut s)| {
                    s.index = i;
                    s
                }),
        );
    }
    Ok(out)
}

fn load_summary(path: &Path) -> Result<Vec<String>> {
    let content = fs::read_to_string(path)?;
    let doc = parse_xml(path, &content)?;
    let root = doc.root_element();
    if !root.has_tag_name("SUMMARY") {
        return Err(xml_error(path, &doc, root, "expected <SUMMARY> root element"));
    }
    Ok(sentence_strings(root)
        .iter()
        .flat_map(|s| text::words(s))
        .collect())
}

/// Loads a topic directory (see the module docs for the layout).
///
/// Documents are ordered by file name. A missing `comments.xml` is not an
/// error; the topic is then comment-free.
pub fn load_topic(path: impl AsRef<Path>) -> Result<Topic> {
    let path = path.as_ref();
    if !path.is_dir() {
        return Err(Error::invalid(format!("{} is not a directory", path.display())));
    }
    let id = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "topic".to_string());

    let mut category = None;
    let mut word_limit = DEFAULT_WORD_LIMIT;
    let meta = path.join("topic.xml");
    if meta.is_file() {
        let content = fs::read_to_string(&meta)?;
        let doc = parse_xml(&meta, &content)?;
        let root = doc.root_element();
        if let Some(c) = root.attribute("category") {
            category = Some(c.parse()?);
        }
        if let Some(w) = root.attribute("word_limit") {
            word_limit = w
                .parse()
                .ok()
                .filter(|&w: &usize| w > 0)
                .ok_or_else(|| xml_error(&meta, &doc, root, "word_limit must be a positive integer"))?;
        }
    }

    let news_dir = path.join("news");
    if !news_dir.is_dir() {
        return Err(Error::invalid(format!("{} has no news/ directory", path.display())));
    }
    let mut documents = Vec::new();
    for file in xml_files(&news_dir)? {
        let mut doc = load_document(&file)?;
        if doc.sentences.is_empty() {
            warn!("{}: document has no sentences, skipped", file.display());
            continue;
        }
        if documents.iter().any(|d: &NewsDocument| d.id == doc.id) {
            return Err(Error::invalid(format!("duplicate document id {:?}", doc.id)));
        }
        attach_parses(path, &mut doc)?;
        documents.push(doc);
    }

    let comments_file = path.join("comments.xml");
    let comments = if comments_file.is_file() {
        load_comments(&comments_file)?
    } else {
        warn!("{}: no comments.xml, proceeding without comments", path.display());
        Vec::new()
    };

    let summaries_dir = path.join("summaries");
    let mut model_summaries = Vec::new();
    if summaries_dir.is_dir() {
        for file in xml_files(&summaries_dir)? {
            model_summaries.push(load_summary(&file)?);
        }
    }

    let topic = Topic {
        id,
        category,
        documents,
        comments,
        model_summaries,
        summary_word_limit: word_limit,
    };
    if topic.news_sentence_count() == 0 {
        return Err(Error::invalid(format!(
            "{}: topic has no news sentences",
            path.display()
        )));
    }
    Ok(topic)
}

fn attach_parses(topic_dir: &Path, doc: &mut NewsDocument) -> Result<()> {
    let file = topic_dir.join("parses").join(format!("{}.txt", doc.id));
    if !file.is_file() {
        return Ok(());
    }
    let content = fs::read_to_string(&file)?;
    let lines: Vec<&str> = content.lines().collect();
    if lines.len() != doc.sentences.len() {
        warn!(
            "{}: {} trees for {} sentences; aligning by index",
            file.display(),
            lines.len(),
            doc.sentences.len()
        );
    }
    for (s, line) in doc.sentences.iter_mut().zip(lines) {
        let line = line.trim();
        if !line.is_empty() {
            s.parse = Some(line.to_string());
        }
    }
    Ok(())
}


/// Vectorized view of a topic: shared vocabulary, news and comment
/// matrices, and the identity of every surviving row.
#[derive(Debug, Clone)]
pub struct TopicMatrices {
    pub vocab: Vocabulary,
    pub news: BowMatrix,
    pub comments: BowMatrix,
    /// `(doc_id, sentence index)` of each news row.
    pub news_ids: Vec<(String, usize)>,
    /// [`CommentSentence::key`] of each comment row.
    pub comment_keys: Vec<String>,
}

impl TopicMatrices {
    pub fn build(topic: &Topic, min_df: usize) -> Result<Self> {
        let vocab = build_vocabulary(topic, min_df)?;
        Self::with_vocabulary(topic, vocab)
    }

    pub fn with_vocabulary(topic: &Topic, vocab: Vocabulary) -> Result<Self> {
        let sentences: Vec<&Sentence> = topic.news_sentences().collect();
        let owned: Vec<Sentence> = sentences.iter().map(|s| (*s).clone()).collect();
        let news = vectorize(&owned, &vocab, BowKind::News);
        if news.rows() == 0 {
            return Err(Error::invalid("no news sentence contains a vocabulary term"));
        }
        let comments = vectorize(&topic.comments, &vocab, BowKind::Comment);
        let news_ids = news
            .source_rows
            .iter()
            .map(|&i| (sentences[i].doc_id.clone(), sentences[i].index))
            .collect();
        let comment_keys = comments
            .source_rows
            .iter()
            .map(|&i| topic.comments[i].key())
            .collect();
        Ok(TopicMatrices {
            vocab,
            news,
            comments,
            news_ids,
            comment_keys,
        })
    }
}
