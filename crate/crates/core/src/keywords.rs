//! Token normalization, lemmatization, stop words and two-tier synonym expansion.
//!
//! Synonym tier 1 is the extensive list used when querying for spottings;
//! tier 2 is the restrictive list used to credit predictions. A tier-2 pair is
//! implicitly a tier-1 pair as well.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Pairs below this similarity are dropped at load.
pub const MIN_SYNONYM_SIMILARITY: f32 = 0.5;

const NUMBER_WORDS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

fn number_word(n: u32) -> String {
    match n {
        0..=19 => NUMBER_WORDS[n as usize].to_string(),
        100 => "hundred".to_string(),
        _ if n.is_multiple_of(10) => TENS[(n / 10) as usize].to_string(),
        _ => format!("{}-{}", TENS[(n / 10) as usize], NUMBER_WORDS[(n % 10) as usize]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    /// Extensive query list.
    One = 1,
    /// Restrictive evaluation list, a subset of tier one.
    Two = 2,
}

impl Tier {
    pub fn from_u8(v: u8) -> Option<Tier> {
        match v {
            1 => Some(Tier::One),
            2 => Some(Tier::Two),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Whether an entry stored with tier `self` belongs to the `requested` list.
    pub fn includes(self, requested: Tier) -> bool {
        self >= requested
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynonymEntry {
    pub similarity: f32,
    pub tier: Tier,
}

/// Symmetric word -> synonym relation with per-pair similarity and tier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynonymTable {
    entries: BTreeMap<String, BTreeMap<String, SynonymEntry>>,
}

impl SynonymTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the pair in both directions. Returns `false` (and stores nothing) when
    /// the similarity is under [`MIN_SYNONYM_SIMILARITY`]. Repeated pairs keep the
    /// higher tier and similarity.
    pub fn insert(&mut self, word: &str, synonym: &str, similarity: f32, tier: Tier) -> Result<bool> {
        if !(0.0..=1.0).contains(&similarity) {
            return Err(Error::Data(format!(
                "similarity {similarity} for {word:?}/{synonym:?} outside [0, 1]"
            )));
        }
        if word.is_empty() || synonym.is_empty() {
            return Err(Error::Data("empty word in synonym pair".into()));
        }
        if similarity < MIN_SYNONYM_SIMILARITY || word == synonym {
            return Ok(false);
        }
        for (a, b) in [(word, synonym), (synonym, word)] {
            let slot = self
                .entries
                .entry(a.to_string())
                .or_default()
                .entry(b.to_string())
                .or_insert(SynonymEntry { similarity, tier });
            slot.similarity = slot.similarity.max(similarity);
            slot.tier = slot.tier.max(tier);
        }
        Ok(true)
    }

    pub fn synonyms<'a>(&'a self, word: &str, tier: Tier) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .get(word)
            .into_iter()
            .flat_map(move |m| m.iter().filter(move |(_, e)| e.tier.includes(tier)))
            .map(|(w, _)| w.as_str())
    }

    pub fn is_synonym(&self, a: &str, b: &str, tier: Tier) -> bool {
        self.entries
            .get(a)
            .and_then(|m| m.get(b))
            .is_some_and(|e| e.tier.includes(tier))
    }

    /// All stored directed pairs in sorted order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, SynonymEntry)> {
        self.entries
            .iter()
            .flat_map(|(w, m)| m.iter().map(move |(s, e)| (w.as_str(), s.as_str(), *e)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaTable(BTreeMap<String, String>);

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, lemma: impl Into<String>) {
        self.0.insert(word.into(), lemma.into());
    }

    pub fn lemmatize<'a>(&'a self, token: &'a str) -> &'a str {
        self.0.get(token).map(String::as_str).unwrap_or(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(w, l)| (w.as_str(), l.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(BTreeSet<String>);

impl StopWords {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>) {
        self.0.insert(word.into());
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for StopWords {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        StopWords(iter.into_iter().collect())
    }
}

/// Lowercases, strips surrounding punctuation and spells out small integers.
#[derive(Debug, Clone)]
pub struct Normalizer {
    numbers: HashMap<String, String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        let numbers = (0..=100).map(|n| (n.to_string(), number_word(n))).collect();
        Normalizer { numbers }
    }
}

impl Normalizer {
    /// Adds or overrides a digit-string spelling, e.g. `("1000", "thousand")`.
    pub fn add_number(&mut self, digits: impl Into<String>, word: impl Into<String>) {
        self.numbers.insert(digits.into(), word.into());
    }

    pub fn normalize(&self, token: &str) -> String {
        let lower = token.to_lowercase();
        let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
        match self.numbers.get(trimmed) {
            Some(word) => word.clone(),
            None => trimmed.to_string(),
        }
    }
}

/// [`Normalizer::normalize`] with the built-in 0-100 number table.
pub fn normalize_token(token: &str) -> String {
    thread_local! {
        static DEFAULT: Normalizer = Normalizer::default();
    }
    DEFAULT.with(|n| n.normalize(token))
}

pub fn lemmatize(token: &str, table: &LemmaTable) -> String {
    table.lemmatize(token).to_string()
}

/// True iff `predicted` is in `reference` or has a tier-2 synonym there.
pub fn matches(predicted: &str, reference: &BTreeSet<String>, table: &SynonymTable) -> bool {
    reference.contains(predicted) || table.synonyms(predicted, Tier::Two).any(|s| reference.contains(s))
}

/// Everything needed to turn subtitle text into keyword sets.
#[derive(Debug, Clone, Default)]
pub struct KeywordTables {
    pub normalizer: Normalizer,
    pub lemmas: LemmaTable,
    pub stopwords: StopWords,
    pub synonyms: SynonymTable,
}

impl KeywordTables {
    /// Normalized, lemmatized form of a single word.
    pub fn canonical(&self, token: &str) -> String {
        let norm = self.normalizer.normalize(token);
        self.lemmas.lemmatize(&norm).to_string()
    }

    /// Content lemmas of `text` in order of appearance, stop words removed.
    pub fn content_lemmas(&self, text: &str) -> Vec<String> {
        text.split_whitespace()
            .map(|t| self.normalizer.normalize(t))
            .filter(|t| !t.is_empty() && !self.stopwords.contains(t))
            .map(|t| self.lemmas.lemmatize(&t).to_string())
            .collect()
    }

    /// De-duplicated content lemmas.
    pub fn reference_set(&self, text: &str) -> BTreeSet<String> {
        self.content_lemmas(text).into_iter().collect()
    }

    /// Content lemmas plus their synonyms from the requested tier.
    pub fn expand_query(&self, text: &str, tier: Tier) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for lemma in self.content_lemmas(text) {
            out.extend(self.synonyms.synonyms(&lemma, tier).map(str::to_string));
            out.insert(lemma);
        }
        out
    }

    pub fn matches(&self, predicted: &str, reference: &BTreeSet<String>) -> bool {
        matches(predicted, reference, &self.synonyms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tables() -> KeywordTables {
        let mut t = KeywordTables::default();
        for w in ["is", "it", "the", "a", "but", "no", "oh"] {
            t.stopwords.insert(w);
        }
        t.lemmas.insert("sat", "sit");
        t.lemmas.insert("cats", "cat");
        t.lemmas.insert("arrived", "arrive");
        t.synonyms.insert("dad", "father", 0.93, Tier::One).unwrap();
        t.synonyms.insert("mum", "mother", 0.95, Tier::Two).unwrap();
        t
    }

    #[test]
    fn normalizes_tokens() {
        assert_eq!(normalize_token("Two,"), "two");
        assert_eq!(normalize_token("2"), "two");
        assert_eq!(normalize_token("BBC"), "bbc");
        assert_eq!(normalize_token("(100)"), "hundred");
        assert_eq!(normalize_token("42"), "forty-two");
        assert_eq!(normalize_token("101"), "101");
        assert_eq!(normalize_token("don't!"), "don't");
        assert_eq!(normalize_token("?!"), "");
        let mut n = Normalizer::default();
        n.add_number("1000", "thousand");
        assert_eq!(n.normalize("1000"), "thousand");
    }

    #[test]
    fn lemmatizes_by_lookup() {
        let t = tables();
        assert_eq!(lemmatize("sat", &t.lemmas), "sit");
        assert_eq!(lemmatize("cats", &t.lemmas), "cat");
        assert_eq!(lemmatize("zzz", &t.lemmas), "zzz");
    }

    #[test]
    fn expands_queries() {
        let t = tables();
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(
            t.expand_query("Dad arrived", Tier::One),
            set(&["dad", "father", "arrive"])
        );
        assert_eq!(t.expand_query("Dad arrived", Tier::Two), set(&["dad", "arrive"]));
        assert!(t.expand_query("is it?", Tier::One).is_empty());
        assert_eq!(t.expand_query("Mum!", Tier::Two), set(&["mum", "mother"]));
        assert_eq!(t.reference_set("The cat sat"), set(&["cat", "sit"]));
    }

    #[test]
    fn matching_uses_tier_two_only() {
        let mut t = tables();
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert!(!t.matches("father", &set(&["dad"])));
        t.synonyms.insert("dad", "father", 0.93, Tier::Two).unwrap();
        assert!(t.matches("father", &set(&["dad"])));
        assert!(t.matches("dad", &set(&["father"])));
        assert!(!t.matches("dog", &set(&["cat"])));
        assert!(t.matches("cat", &set(&["cat"])));
    }

    #[test]
    fn synonym_loader_rules() {
        let mut t = SynonymTable::new();
        assert!(!t.insert("a", "b", 0.3, Tier::One).unwrap());
        assert!(t.is_empty());
        assert!(t.insert("a", "b", 1.3, Tier::One).is_err());
        t.insert("a", "b", 0.6, Tier::One).unwrap();
        t.insert("b", "a", 0.7, Tier::Two).unwrap();
        assert!(t.is_synonym("a", "b", Tier::Two));
        assert_eq!(t.pairs().count(), 2);
        assert!(t.pairs().all(|(_, _, e)| e.similarity == 0.7));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(token in "\\PC{0,12}") {
            let once = normalize_token(&token);
            prop_assert_eq!(normalize_token(&once), once.clone());
        }

        #[test]
        fn tier_two_expansion_is_subset(
            words in proptest::collection::vec("[a-e]{1,2}", 0..8),
            pairs in proptest::collection::vec(("[a-e]{1,2}", "[a-e]{1,2}", 0.0f32..1.0, 1u8..3), 0..10),
        ) {
            let mut t = KeywordTables::default();
            for (a, b, s, tier) in &pairs {
                t.synonyms.insert(a, b, *s, Tier::from_u8(*tier).unwrap()).unwrap();
            }
            let text = words.join(" ");
            let two = t.expand_query(&text, Tier::Two);
            let one = t.expand_query(&text, Tier::One);
            prop_assert!(two.is_subset(&one));
            for p in &one {
                for r in &one {
                    let rs: BTreeSet<String> = [r.clone()].into();
                    let ps: BTreeSet<String> = [p.clone()].into();
                    prop_assert_eq!(t.matches(p, &rs), t.matches(r, &ps));
                }
            }
        }
    }
}
