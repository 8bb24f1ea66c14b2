//! Text tables: synonyms (`word\tsynonym\tsimilarity\ttier`), lemmas
//! (`word\tlemma`) and stop words (one per line).

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::keywords::{LemmaTable, StopWords, SynonymTable, Tier};

fn fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split('\t').collect();
    if parts.len() != n {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {n} tab-separated fields, found {}", parts.len()),
        });
    }
    Ok(parts)
}

/// Reads a synonym table. Pairs are symmetrized and pairs with similarity
/// under 0.5 are skipped.
pub fn read_synonyms<R: BufRead>(source: R) -> Result<SynonymTable> {
    let mut table = SynonymTable::new();
    let mut dropped = 0usize;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f = fields(&line, 4, lineno)?;
        let similarity: f32 = f[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad similarity {:?}", f[2]),
        })?;
        let tier = f[3]
            .parse::<u8>()
            .ok()
            .and_then(Tier::from_u8)
            .ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("tier must be 1 or 2, found {:?}", f[3]),
            })?;
        let kept = table.insert(f[0], f[1], similarity, tier).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if !kept {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::debug!("skipped {dropped} synonym rows below the similarity floor");
    }
    Ok(table)
}

pub fn write_synonyms<W: Write>(table: &SynonymTable, sink: &mut W) -> Result<()> {
    for (word, synonym, entry) in table.pairs() {
        writeln!(sink, "{word}\t{synonym}\t{}\t{}", entry.similarity, entry.tier.as_u8())?;
    }
    Ok(())
}

pub fn read_lemmas<R: BufRead>(source: R) -> Result<LemmaTable> {
    let mut table = LemmaTable::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f = fields(&line, 2, i + 1)?;
        table.insert(f[0], f[1]);
    }
    Ok(table)
}

pub fn write_lemmas<W: Write>(table: &LemmaTable, sink: &mut W) -> Result<()> {
    for (word, lemma) in table.iter() {
        writeln!(sink, "{word}\t{lemma}")?;
    }
    Ok(())
}

pub fn read_stopwords<R: BufRead>(source: R) -> Result<StopWords> {
    let mut words = StopWords::new();
    for line in source.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() {
            words.insert(word);
        }
    }
    Ok(words)
}

pub fn write_stopwords<W: Write>(words: &StopWords, sink: &mut W) -> Result<()> {
    for w in words.iter() {
        writeln!(sink, "{w}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_synonym_row() {
        let t = read_synonyms("dad\tfather\t0.93\t2\n".as_bytes()).unwrap();
        assert!(t.is_synonym("dad", "father", Tier::Two));
        assert!(t.is_synonym("father", "dad", Tier::Two));
        assert!(t.is_synonym("father", "dad", Tier::One));
        let mut out = Vec::new();
        write_synonyms(&t, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "dad\tfather\t0.93\t2\nfather\tdad\t0.93\t2\n"
        );
    }

    #[test]
    fn synonym_errors() {
        assert!(matches!(
            read_synonyms("a\tb\t0.9\t3\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_synonyms("a\tb\t0.9\t1\na\tb\tx\t1\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_synonyms("a\tb\t0.9\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(read_synonyms("a\tb\t0.2\t1\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn lemma_and_stopword_tables() {
        let l = read_lemmas("sat\tsit\ncats\tcat\n".as_bytes()).unwrap();
        assert_eq!(l.lemmatize("sat"), "sit");
        assert!(read_lemmas("sat sit\n".as_bytes()).is_err());
        let s = read_stopwords("the\nis\n\n".as_bytes()).unwrap();
        assert!(s.contains("the") && s.contains("is") && s.len() == 2);
    }

    proptest! {
        #[test]
        fn tables_round_trip(
            pairs in proptest::collection::vec(("[a-z]{1,5}", "[a-z]{1,5}", 0.0f32..=1.0, 1u8..3), 0..15),
            lemmas in proptest::collection::btree_map("[a-z]{1,6}", "[a-z]{1,6}", 0..10),
            stops in proptest::collection::btree_set("[a-z']{1,6}", 0..10),
        ) {
            let mut syn = SynonymTable::new();
            for (a, b, s, t) in &pairs {
                syn.insert(a, b, *s, Tier::from_u8(*t).unwrap()).unwrap();
            }
            let mut a = Vec::new();
            write_synonyms(&syn, &mut a).unwrap();
            let back = read_synonyms(a.as_slice()).unwrap();
            prop_assert_eq!(&back, &syn);
            let mut b = Vec::new();
            write_synonyms(&back, &mut b).unwrap();
            prop_assert_eq!(a, b);

            let mut lt = LemmaTable::new();
            for (w, l) in &lemmas { lt.insert(w.clone(), l.clone()); }
            let mut a = Vec::new();
            write_lemmas(&lt, &mut a).unwrap();
            let mut b = Vec::new();
            write_lemmas(&read_lemmas(a.as_slice()).unwrap(), &mut b).unwrap();
            prop_assert_eq!(a, b);

            let sw: StopWords = stops.into_iter().collect();
            let mut a = Vec::new();
            write_stopwords(&sw, &mut a).unwrap();
            let mut b = Vec::new();
            write_stopwords(&read_stopwords(a.as_slice()).unwrap(), &mut b).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
