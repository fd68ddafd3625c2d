use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde_json::Value;

use super::{PaperId, PaperRecord};
use crate::error::{Error, Result};

/// Layout of a corpus file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorpusSchema {
    /// One JSON object per line (DBLP v12 layout; the dump's surrounding
    /// `[`, `]` and leading commas are tolerated).
    Jsonl,
    /// `src<TAB>dst` citation pairs, with an optional metadata table of
    /// `id<TAB>year<TAB>title<TAB>kw1;kw2;...` rows.
    EdgeList { metadata: Option<PathBuf> },
}

impl FromStr for CorpusSchema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "dblp" => Ok(CorpusSchema::Jsonl),
            "edgelist" => Ok(CorpusSchema::EdgeList { metadata: None }),
            other => Err(Error::param(format!("unknown corpus schema `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub skipped: usize,
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String>)>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let owned = path.to_path_buf();
    Ok(BufReader::new(f)
        .lines()
        .enumerate()
        .map(move |(i, l)| (i + 1, l.map_err(|e| Error::io(&owned, e)))))
}

/// Read every parseable record. Malformed lines are skipped and counted; a
/// non-empty file yielding no record at all is reported as a schema
/// mismatch at its first offending line.
pub fn load_corpus(path: &Path, schema: &CorpusSchema) -> Result<(Vec<PaperRecord>, LoadReport)> {
    let (records, skipped, first_bad) = match schema {
        CorpusSchema::Jsonl => load_jsonl(path)?,
        CorpusSchema::EdgeList { metadata } => load_edgelist(path, metadata.as_deref())?,
    };
    if records.is_empty() {
        if let Some((line, reason)) = first_bad {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                line,
                reason,
            });
        }
    }
    if skipped > 0 {
        warn!("{}: skipped {skipped} malformed line(s)", path.display());
    }
    let report = LoadReport {
        records: records.len(),
        skipped,
    };
    Ok((records, report))
}

type Loaded = (Vec<PaperRecord>, usize, Option<(usize, String)>);

fn load_jsonl(path: &Path) -> Result<Loaded> {
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut first_bad = None;
    for (no, line) in lines(path)? {
        let line = line?;
        let body = line.trim().trim_start_matches(',').trim();
        if body.is_empty() || body == "[" || body == "]" {
            continue;
        }
        match parse_json_record(body) {
            Ok(r) => out.push(r),
            Err(reason) => {
                skipped += 1;
                first_bad.get_or_insert((no, reason));
            }
        }
    }
    Ok((out, skipped, first_bad))
}

fn id_value(v: &Value) -> Option<PaperId> {
    match v {
        Value::String(s) if !s.trim().is_empty() => Some(PaperId(s.trim().to_owned())),
        Value::Number(n) if n.is_u64() || n.is_i64() => Some(PaperId(n.to_string())),
        _ => None,
    }
}

fn keyword_value(v: &Value) -> Option<String> {
    let s = match v {
        Value::String(s) => s.as_str(),
        Value::Object(o) => o.get("name")?.as_str()?,
        _ => return None,
    };
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_owned())
}

pub(crate) fn parse_json_record(body: &str) -> std::result::Result<PaperRecord, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| e.to_string())?;
    let obj = v.as_object().ok_or("record is not an object")?;
    let id = obj.get("id").and_then(id_value).ok_or("missing or invalid `id`")?;
    let title = match obj.get("title") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("`title` is not a string".into()),
    };
    let year = match obj.get("year") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => Some(
            n.as_i64()
                .and_then(|y| i32::try_from(y).ok())
                .ok_or("`year` is not an integer")?,
        ),
        Some(_) => return Err("`year` is not an integer".into()),
    };
    let mut references = Vec::new();
    match obj.get("references") {
        None | Some(Value::Null) => {}
        Some(Value::Array(xs)) => {
            let mut seen = HashSet::new();
            for x in xs {
                let r = id_value(x).ok_or("invalid reference id")?;
                if seen.insert(r.clone()) {
                    references.push(r);
                }
            }
        }
        Some(_) => return Err("`references` is not an array".into()),
    }
    let kw_field = obj.get("keywords").or_else(|| obj.get("fos"));
    let mut keywords = Vec::new();
    match kw_field {
        None | Some(Value::Null) => {}
        Some(Value::Array(xs)) => {
            for x in xs {
                let k = keyword_value(x).ok_or("invalid keyword entry")?;
                if !keywords.contains(&k) {
                    keywords.push(k);
                }
            }
        }
        Some(_) => return Err("keyword field is not an array".into()),
    }
    Ok(PaperRecord {
        id,
        year,
        title,
        keywords,
        references,
    })
}

fn load_edgelist(path: &Path, metadata: Option<&Path>) -> Result<Loaded> {
    let mut order: Vec<PaperId> = Vec::new();
    let mut recs: HashMap<PaperId, PaperRecord> = HashMap::new();
    fn touch<'a>(
        recs: &'a mut HashMap<PaperId, PaperRecord>,
        order: &mut Vec<PaperId>,
        id: &PaperId,
    ) -> &'a mut PaperRecord {
        recs.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            PaperRecord::new(id.clone())
        })
    }
    let mut skipped = 0;
    let mut first_bad = None;

    if let Some(meta) = metadata {
        for (no, line) in lines(meta)? {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.is_empty() || f[0].trim().is_empty() {
                skipped += 1;
                first_bad.get_or_insert((no, "metadata row without id".to_owned()));
                continue;
            }
            let year = match f.get(1).map(|s| s.trim()) {
                None | Some("") => None,
                Some(y) => match y.parse::<i32>() {
                    Ok(y) => Some(y),
                    Err(_) => {
                        skipped += 1;
                        first_bad.get_or_insert((no, format!("bad year `{y}`")));
                        continue;
                    }
                },
            };
            let id = PaperId(f[0].trim().to_owned());
            let (title, kws) = (f.get(2), f.get(3));
            let r = touch(&mut recs, &mut order, &id);
            r.year = year;
            r.title = title.map(|s| s.to_string()).unwrap_or_default();
            r.keywords = kws
                .map(|s| {
                    let mut v: Vec<String> = Vec::new();
                    for k in s.split(';').map(str::trim).filter(|k| !k.is_empty()) {
                        if !v.iter().any(|x| x == k) {
                            v.push(k.to_owned());
                        }
                    }
                    v
                })
                .unwrap_or_default();
        }
    }

    let mut edge_count = 0;
    for (no, line) in lines(path)? {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.trim().split('\t').map(str::trim).collect();
        if f.len() != 2 || f[0].is_empty() || f[1].is_empty() {
            skipped += 1;
            first_bad.get_or_insert((no, "expected `src<TAB>dst`".to_owned()));
            continue;
        }
        let (s, t) = (PaperId(f[0].to_owned()), PaperId(f[1].to_owned()));
        touch(&mut recs, &mut order, &s);
        touch(&mut recs, &mut order, &t);
        let r = recs.get_mut(&s).expect("just inserted");
        if !r.references.contains(&t) {
            r.references.push(t);
        }
        edge_count += 1;
    }
    let out = if edge_count == 0 && metadata.is_none() {
        Vec::new()
    } else {
        order.iter().map(|id| recs.remove(id).unwrap()).collect()
    };
    Ok((out, skipped, first_bad))
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_valid_records() {
        let f = file(concat!(
            r#"{"id": 1, "title": "A", "year": 2001, "references": [2, 3]}"#, "\n",
            r#"{"id": "2", "title": "B", "fos": [{"name": "Payment", "w": 0.5}, {"name": " Incentive "}]}"#, "\n",
            r#"{"id": 3, "keywords": ["x", "x", "y"]}"#, "\n",
        ));
        let (recs, rep) = load_corpus(f.path(), &CorpusSchema::Jsonl).unwrap();
        assert_eq!(rep, LoadReport { records: 3, skipped: 0 });
        assert_eq!(recs[0].references, vec![PaperId::from("2"), PaperId::from("3")]);
        assert_eq!(recs[0].year, Some(2001));
        assert_eq!(recs[1].keywords, ["Payment", "Incentive"]);
        assert_eq!(recs[2].keywords, ["x", "y"]);
    }

    #[test]
    fn malformed_line_skipped() {
        let f = file("{\"id\": 1}\n{not json\n{\"id\": 2, \"references\": [1, 1, 9]}\n");
        let (recs, rep) = load_corpus(f.path(), &CorpusSchema::Jsonl).unwrap();
        assert_eq!(rep, LoadReport { records: 2, skipped: 1 });
        // unknown id 9 kept for later resolution, duplicate collapsed
        assert_eq!(recs[1].references.len(), 2);
    }

    #[test]
    fn dblp_array_wrapping() {
        let f = file("[\n{\"id\": 1}\n,{\"id\": 2}\n]\n");
        let (recs, _) = load_corpus(f.path(), &CorpusSchema::Jsonl).unwrap();
        assert_eq!(recs.len(), 2);
    }

    #[test]
    fn wrong_schema_is_fatal_with_line() {
        let f = file("\n1\t2\n2\t3\n");
        match load_corpus(f.path(), &CorpusSchema::Jsonl) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let missing = Path::new("/nonexistent/corpus.jsonl");
        assert!(matches!(load_corpus(missing, &CorpusSchema::Jsonl), Err(Error::Io { .. })));
    }

    #[test]
    fn edge_list_with_metadata() {
        let edges = file("# src\tdst\na\tb\nb\tc\nbroken line\na\tc\n");
        let meta = file("a\t2020\tPaper A\tX; Y\nc\t\tPaper C\t\n");
        let schema = CorpusSchema::EdgeList {
            metadata: Some(meta.path().to_path_buf()),
        };
        let (recs, rep) = load_corpus(edges.path(), &schema).unwrap();
        assert_eq!(rep.skipped, 1);
        let ids: Vec<_> = recs.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "c", "b"]);
        assert_eq!(recs[0].keywords, ["X", "Y"]);
        assert_eq!(recs[0].year, Some(2020));
        assert_eq!(recs[0].references.len(), 2);
        assert_eq!(recs[1].year, None);
    }
}
