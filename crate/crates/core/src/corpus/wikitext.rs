use super::{Document, Section, Sentence, SentenceSplitter};

#[derive(Debug)]
struct Heading<'a> {
    start: usize,
    end: usize,
    depth: u8,
    title: &'a str,
}

fn eq_run(bytes: &[u8], from: usize) -> usize {
    bytes[from..].iter().take_while(|&&b| b == b'=').count()
}

/// Finds balanced `==T==`, `===T===` and `====T====` markers. A marker must
/// close on the same line with the same number of `=`; anything else is text.
fn find_headings(raw: &str) -> Vec<Heading<'_>> {
    let bytes = raw.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'=' {
            i += 1;
            continue;
        }
        let run = eq_run(bytes, i);
        if (2..=4).contains(&run) {
            let after = i + run;
            let line_end = raw[after..].find('\n').map_or(raw.len(), |p| after + p);
            if let Some(p) = raw[after..line_end].find('=') {
                let close = after + p;
                let close_run = eq_run(bytes, close);
                let title = raw[after..close].trim();
                if close_run == run && !title.is_empty() {
                    out.push(Heading {
                        start: i,
                        end: close + close_run,
                        depth: run as u8,
                        title,
                    });
                    i = close + close_run;
                    continue;
                }
            }
        }
        i += run;
    }
    out
}

fn build_section(body: &str, heading: &str, depth: u8, index: usize, doc_id: &str, splitter: &SentenceSplitter) -> Section {
    let sentences = splitter
        .split(body)
        .into_iter()
        .enumerate()
        .map(|(k, text)| Sentence::new(text, doc_id, index, k))
        .collect();
    Section {
        heading: heading.to_string(),
        depth,
        sentences,
        section_index: index,
    }
}

/// Parses heading-delimited plain text into a document with a flat list of
/// sections. Text before the first heading is section 0 with an empty
/// heading; heading depth is discarded.
pub fn parse_wikitext_lite(raw: &str, doc_id: &str, lang: &str) -> Document {
    parse_with_splitter(raw, doc_id, lang, &SentenceSplitter::for_lang(lang))
}

pub(crate) fn parse_with_splitter(raw: &str, doc_id: &str, lang: &str, splitter: &SentenceSplitter) -> Document {
    let mut doc = Document {
        doc_id: doc_id.to_string(),
        lang: lang.to_string(),
        categories: Vec::new(),
        sections: Vec::new(),
    };
    if raw.trim().is_empty() {
        return doc;
    }
    let headings = find_headings(raw);
    let lead_end = headings.first().map_or(raw.len(), |h| h.start);
    doc.sections.push(build_section(&raw[..lead_end], "", 0, 0, doc_id, splitter));
    for (k, h) in headings.iter().enumerate() {
        let body_end = headings.get(k + 1).map_or(raw.len(), |n| n.start);
        let index = doc.sections.len();
        doc.sections.push(build_section(&raw[h.end..body_end], h.title, h.depth, index, doc_id, splitter));
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(sec: &Section) -> Vec<&str> {
        sec.sentences.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn inline_heading() {
        let d = parse_wikitext_lite("Intro. == Career == She sang.", "d", "en");
        assert_eq!(d.sections.len(), 2);
        assert_eq!(d.sections[0].heading, "");
        assert_eq!(texts(&d.sections[0]), ["Intro."]);
        assert_eq!(d.sections[1].heading, "Career");
        assert_eq!(texts(&d.sections[1]), ["She sang."]);
    }

    #[test]
    fn flat_hierarchy() {
        let d = parse_wikitext_lite("== A ==\n=== B ===\ntext", "d", "en");
        assert_eq!(d.sections.len(), 3);
        assert_eq!(d.sections[2].heading, "B");
        assert_eq!(d.sections[2].depth, 3);
        assert_eq!(texts(&d.sections[2]), ["text"]);
        assert!(d.sections[1].sentences.is_empty());
        for (i, s) in d.sections.iter().enumerate() {
            assert_eq!(s.section_index, i);
        }
    }

    #[test]
    fn empty_input() {
        assert!(parse_wikitext_lite("", "d", "en").sections.is_empty());
        assert!(parse_wikitext_lite(" \n\t", "d", "en").sections.is_empty());
    }

    #[test]
    fn unbalanced_marker_is_text() {
        let d = parse_wikitext_lite("== A ===\nbody.", "d", "en");
        assert_eq!(d.sections.len(), 1);
        assert_eq!(texts(&d.sections[0]), ["== A === body."]);
        let d = parse_wikitext_lite("== open\nbody.", "d", "en");
        assert_eq!(d.sections.len(), 1);
    }

    #[test]
    fn sentence_metadata() {
        let d = parse_wikitext_lite("A b. C d.\n== H ==\nE f. G h. I j.", "doc7", "en");
        let s = &d.sections[1].sentences;
        assert_eq!(s.len(), 3);
        assert!(s.iter().enumerate().all(|(k, x)| x.sentence_index == k && x.section_index == 1 && x.doc_id == "doc7"));
        assert_eq!(s[0].tokens, ["E", "f", "."]);
    }
}
