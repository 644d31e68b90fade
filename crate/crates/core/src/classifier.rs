//! Scientific-paper gate run before extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::SelectedText;
use crate::model::{sizes_equal, MarkerConfig};
use crate::text::locate_marker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Scientific,
    Unscientific,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Scientific => "scientific",
            Verdict::Unscientific => "unscientific",
        }
    }
}

/// How the five feature flags combine into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DecisionRule {
    /// Abstract marker, references marker and a title candidate.
    #[default]
    Default,
    AllFive,
    /// At least `k` of the five flags.
    AtLeast(u8),
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionRule::Default => f.write_str("default"),
            DecisionRule::AllFive => f.write_str("all"),
            DecisionRule::AtLeast(k) => write!(f, "k-of-5:{k}"),
        }
    }
}

impl FromStr for DecisionRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "default" => Ok(DecisionRule::Default),
            "all" | "all-five" => Ok(DecisionRule::AllFive),
            other => {
                let k = other
                    .strip_prefix("k-of-5:")
                    .and_then(|k| k.parse::<u8>().ok())
                    .filter(|k| *k <= 5)
                    .ok_or_else(|| {
                        format!("unknown decision rule `{other}` (default, all, k-of-5:N)")
                    })?;
                Ok(DecisionRule::AtLeast(k))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub doc_id: String,
    pub has_abstract_marker: bool,
    pub has_keywords_marker: bool,
    pub has_conclusion_marker: bool,
    pub has_references_marker: bool,
    pub has_title_candidate: bool,
    /// `None` until [`classify`] runs.
    pub verdict: Option<Verdict>,
}

impl ClassificationResult {
    /// Flags in the order abstract, keywords, conclusion, references, title.
    pub fn flags(&self) -> [bool; 5] {
        [
            self.has_abstract_marker,
            self.has_keywords_marker,
            self.has_conclusion_marker,
            self.has_references_marker,
            self.has_title_candidate,
        ]
    }
}

/// Computes the five feature flags; the verdict is left unset.
pub fn extract_features(sel: &SelectedText, cfg: &MarkerConfig) -> ClassificationResult {
    let first = &sel.first_page_spans;
    let tail = &sel.tail_spans;
    let abstract_hit = locate_marker(first, &cfg.abstract_markers, 0, first.len());
    let region_end = abstract_hit.as_ref().map_or(first.len(), |h| h.span_index);

    let max = first
        .iter()
        .map(|s| s.font_size)
        .fold(f64::NEG_INFINITY, f64::max);
    let at_max: Vec<usize> = (0..first.len())
        .filter(|&i| sizes_equal(first[i].font_size, max))
        .collect();
    // a title wrapped over several lines still counts as one candidate
    let has_title_candidate = match at_max.as_slice() {
        [] => false,
        [start, ..] => {
            let mut block_end = start + 1;
            while block_end < first.len() && first[block_end - 1].continued_by(&first[block_end]) {
                block_end += 1;
            }
            *start < region_end && at_max.iter().all(|&i| i < block_end)
        }
    };

    ClassificationResult {
        doc_id: sel.doc_id.clone(),
        has_abstract_marker: abstract_hit.is_some(),
        has_keywords_marker: locate_marker(first, &cfg.keywords_markers, 0, first.len()).is_some(),
        has_conclusion_marker: locate_marker(tail, &cfg.conclusion_markers, 0, tail.len())
            .is_some(),
        has_references_marker: locate_marker(tail, &cfg.reference_markers, 0, tail.len()).is_some(),
        has_title_candidate,
        verdict: None,
    }
}

/// The verdict a rule gives for a flag vector.
pub fn decide(flags: [bool; 5], rule: DecisionRule) -> Verdict {
    let [abstract_, _, _, references, title] = flags;
    let scientific = match rule {
        DecisionRule::Default => abstract_ && references && title,
        DecisionRule::AllFive => flags.iter().all(|f| *f),
        DecisionRule::AtLeast(k) => flags.iter().filter(|f| **f).count() >= k as usize,
    };
    if scientific {
        Verdict::Scientific
    } else {
        Verdict::Unscientific
    }
}

pub fn classify(mut features: ClassificationResult, rule: DecisionRule) -> ClassificationResult {
    features.verdict = Some(decide(features.flags(), rule));
    features
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TextSpan;
    use proptest::prelude::*;

    fn span(text: &str, page: u32, order: u32, size: f64) -> TextSpan {
        TextSpan::new(text, page, order, "Times-Roman", size)
    }

    fn selected(first: Vec<TextSpan>, tail: Vec<TextSpan>) -> SelectedText {
        SelectedText {
            doc_id: "d".into(),
            first_page_spans: first,
            tail_spans: tail,
            tail_page_numbers: vec![2],
        }
    }

    #[test]
    fn paper_like_features() {
        let sel = selected(
            vec![
                span("A Title", 1, 0, 18.0),
                span("ABSTRACT", 1, 1, 10.0),
                span("text", 1, 2, 10.0),
                span("Keywords: x", 1, 3, 10.0),
            ],
            vec![span("References", 2, 0, 10.0), span("[1] x", 2, 1, 9.0)],
        );
        let f = extract_features(&sel, &MarkerConfig::default());
        assert!(f.has_abstract_marker && f.has_keywords_marker && f.has_references_marker);
        assert!(f.has_title_candidate);
        assert!(!f.has_conclusion_marker);
        assert_eq!(f.verdict, None);
        assert_eq!(
            classify(f, DecisionRule::Default).verdict,
            Some(Verdict::Scientific)
        );
    }

    #[test]
    fn empty_document_has_no_flags() {
        let f = extract_features(&selected(vec![], vec![]), &MarkerConfig::default());
        assert_eq!(f.flags(), [false; 5]);
    }

    #[test]
    fn tied_max_size_is_not_a_candidate() {
        let first = vec![
            span("One", 1, 0, 18.0),
            span("Two", 1, 1, 18.0),
            span("Abstract", 1, 2, 10.0),
        ];
        let f = extract_features(&selected(first, vec![]), &MarkerConfig::default());
        assert!(!f.has_title_candidate);
    }

    #[test]
    fn wrapped_title_is_one_candidate() {
        let line =
            |t: &str, order, y| TextSpan::new(t, 1, order, "Times-Bold", 18.0).with_baseline(y);
        let abstract_ = span("Abstract", 1, 3, 10.0).with_baseline(200.0);
        let first = vec![
            line("A Long Title", 0, 100.0),
            line("Over Two Lines", 1, 121.0),
            span("A. Author", 1, 2, 11.0).with_baseline(150.0),
            abstract_.clone(),
        ];
        let f = extract_features(&selected(first.clone(), vec![]), &MarkerConfig::default());
        assert!(f.has_title_candidate);

        // same size but a different face, or far below, is a second candidate
        let mut regular = first.clone();
        regular[1] =
            TextSpan::new("Over Two Lines", 1, 1, "Times-Roman", 18.0).with_baseline(121.0);
        assert!(
            !extract_features(&selected(regular, vec![]), &MarkerConfig::default())
                .has_title_candidate
        );
        let mut distant = first;
        distant[1].baseline_y = 160.0;
        assert!(
            !extract_features(&selected(distant, vec![]), &MarkerConfig::default())
                .has_title_candidate
        );
    }

    #[test]
    fn max_after_abstract_is_not_a_candidate() {
        let first = vec![span("Abstract", 1, 0, 10.0), span("Big", 1, 1, 18.0)];
        let f = extract_features(&selected(first, vec![]), &MarkerConfig::default());
        assert!(!f.has_title_candidate);
        let first = vec![span("Big", 1, 0, 18.0), span("small", 1, 1, 10.0)];
        let f = extract_features(&selected(first, vec![]), &MarkerConfig::default());
        assert!(
            f.has_title_candidate,
            "whole page is the region without a marker"
        );
    }

    #[test]
    fn rule_examples() {
        let all = [true; 5];
        for rule in [
            DecisionRule::Default,
            DecisionRule::AllFive,
            DecisionRule::AtLeast(5),
            DecisionRule::AtLeast(3),
        ] {
            assert_eq!(decide(all, rule), Verdict::Scientific);
            assert_eq!(decide([false; 5], rule), Verdict::Unscientific);
        }
        assert_eq!(
            decide([true, false, false, true, true], DecisionRule::Default),
            Verdict::Scientific
        );
        assert_eq!(
            decide([true, false, false, true, true], DecisionRule::AllFive),
            Verdict::Unscientific
        );
        assert_eq!(
            decide([false; 5], DecisionRule::AtLeast(0)),
            Verdict::Scientific
        );
    }

    #[test]
    fn rule_parsing_round_trips() {
        for rule in [
            DecisionRule::Default,
            DecisionRule::AllFive,
            DecisionRule::AtLeast(3),
        ] {
            assert_eq!(rule.to_string().parse::<DecisionRule>().unwrap(), rule);
        }
        assert!("k-of-5:6".parse::<DecisionRule>().is_err());
        assert!("any".parse::<DecisionRule>().is_err());
    }

    fn flag_vec(bits: u8) -> [bool; 5] {
        std::array::from_fn(|i| bits >> i & 1 == 1)
    }

    /// Truth table of the default predicate, written out independently.
    #[test]
    fn default_rule_truth_table() {
        for bits in 0u8..32 {
            let expected = bits & 0b11001 == 0b11001;
            assert_eq!(
                decide(flag_vec(bits), DecisionRule::Default) == Verdict::Scientific,
                expected,
                "{bits:05b}"
            );
        }
    }

    fn arb_rule() -> impl Strategy<Value = DecisionRule> {
        prop_oneof![
            Just(DecisionRule::Default),
            Just(DecisionRule::AllFive),
            (0u8..=5).prop_map(DecisionRule::AtLeast),
        ]
    }

    proptest! {
        #[test]
        fn adding_a_flag_never_demotes(bits in 0u8..32, extra in 0usize..5, rule in arb_rule()) {
            let before = flag_vec(bits);
            let mut after = before;
            after[extra] = true;
            if decide(before, rule) == Verdict::Scientific {
                prop_assert_eq!(decide(after, rule), Verdict::Scientific);
            }
        }

        #[test]
        fn default_scientific_implies_references(bits in 0u8..32) {
            let flags = flag_vec(bits);
            if decide(flags, DecisionRule::Default) == Verdict::Scientific {
                prop_assert!(flags[3]);
            }
        }

        #[test]
        fn verdict_depends_only_on_flags(bits in 0u8..32, rule in arb_rule(), id in "[a-z]{0,8}") {
            let flags = flag_vec(bits);
            let result = ClassificationResult {
                doc_id: id,
                has_abstract_marker: flags[0],
                has_keywords_marker: flags[1],
                has_conclusion_marker: flags[2],
                has_references_marker: flags[3],
                has_title_candidate: flags[4],
                verdict: None,
            };
            prop_assert_eq!(classify(result, rule).verdict, Some(decide(flags, rule)));
        }
    }
}
