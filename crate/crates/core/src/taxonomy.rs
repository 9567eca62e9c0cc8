//! The built-in evaluation-domain taxonomy.
//!
//! Every query targets exactly one leaf. Leaves are grouped under the
//! component they probe; where the methodology nests a family of leaves
//! (e.g. the number conversions of the normalizer) the leaves share a
//! group path, otherwise a leaf is its own group.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Search-engine component under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Normalizer,
    Tokenizer,
    SpellCorrection,
    QueryExpansion,
    Ranking,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Normalizer,
        Component::Tokenizer,
        Component::SpellCorrection,
        Component::QueryExpansion,
        Component::Ranking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Normalizer => "normalizer",
            Component::Tokenizer => "tokenizer",
            Component::SpellCorrection => "spell_correction",
            Component::QueryExpansion => "query_expansion",
            Component::Ranking => "ranking",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Component::Normalizer => "Text normalizer",
            Component::Tokenizer => "Text tokenizer",
            Component::SpellCorrection => "Spell correction",
            Component::QueryExpansion => "Query expansion",
            Component::Ranking => "Ranking",
        }
    }

    /// Components judged through analyzer probes rather than ranked lists.
    pub fn is_analyzer(self) -> bool {
        self != Component::Ranking
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Component::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CoreError::UnknownComponent(s.into()))
    }
}

/// An intermediate node grouping related leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainGroup {
    pub path: &'static str,
    pub label: &'static str,
    pub component: Component,
}

/// A taxonomy leaf: one capability at one difficulty level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainLeaf {
    pub path: &'static str,
    pub label: &'static str,
    pub component: Component,
    pub group: &'static str,
    /// Unsupported leaves exist in the tree but may not be targeted.
    pub supported: bool,
}

const fn leaf(
    component: Component,
    group: &'static str,
    path: &'static str,
    label: &'static str,
) -> DomainLeaf {
    DomainLeaf {
        path,
        label,
        component,
        group,
        supported: true,
    }
}

use Component::*;

static GROUPS: [DomainGroup; 16] = [
    DomainGroup {
        path: "normalizer/numbers",
        label: "Numbers and their written form",
        component: Normalizer,
    },
    DomainGroup {
        path: "normalizer/multi_form",
        label: "Words with multiple written forms",
        component: Normalizer,
    },
    DomainGroup {
        path: "normalizer/homophones",
        label: "Homophones",
        component: Normalizer,
    },
    DomainGroup {
        path: "tokenizer/joined_terms",
        label: "Terms joined without separator",
        component: Tokenizer,
    },
    DomainGroup {
        path: "tokenizer/phrases",
        label: "Phrase detection",
        component: Tokenizer,
    },
    DomainGroup {
        path: "spell_correction/lexicon",
        label: "Lexicon",
        component: SpellCorrection,
    },
    DomainGroup {
        path: "spell_correction/inflection",
        label: "Inflection",
        component: SpellCorrection,
    },
    DomainGroup {
        path: "spell_correction/homonyms",
        label: "Homonyms",
        component: SpellCorrection,
    },
    DomainGroup {
        path: "spell_correction/word_frequency",
        label: "Frequency of words",
        component: SpellCorrection,
    },
    DomainGroup {
        path: "spell_correction/keyboard_order",
        label: "Keyboard order",
        component: SpellCorrection,
    },
    DomainGroup {
        path: "query_expansion/synonyms",
        label: "Synonyms",
        component: QueryExpansion,
    },
    DomainGroup {
        path: "query_expansion/abbreviations",
        label: "Abbreviations",
        component: QueryExpansion,
    },
    DomainGroup {
        path: "query_expansion/punctuations",
        label: "Punctuations",
        component: QueryExpansion,
    },
    DomainGroup {
        path: "ranking/navigational",
        label: "Navigational queries",
        component: Ranking,
    },
    DomainGroup {
        path: "ranking/trend_single_url",
        label: "Trends with single URL",
        component: Ranking,
    },
    DomainGroup {
        path: "ranking/known_items",
        label: "Known items",
        component: Ranking,
    },
];

static LEAVES: [DomainLeaf; 26] = [
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/cardinal",
        "Cardinal numbers",
    ),
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/ordinal",
        "Ordinal numbers",
    ),
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/cost",
        "Cost and benefits",
    ),
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/time",
        "Time",
    ),
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/date",
        "Date",
    ),
    leaf(
        Normalizer,
        "normalizer/numbers",
        "normalizer/numbers/population",
        "Population",
    ),
    leaf(
        Normalizer,
        "normalizer/multi_form",
        "normalizer/multi_form/hamzeh",
        "Hamzeh based multi-form words",
    ),
    leaf(
        Normalizer,
        "normalizer/multi_form",
        "normalizer/multi_form/char_repetition",
        "Character repetitions with similar sounds",
    ),
    leaf(
        Normalizer,
        "normalizer/multi_form",
        "normalizer/multi_form/positional_forms",
        "Initial, centric and final character forms",
    ),
    leaf(
        Normalizer,
        "normalizer/homophones",
        "normalizer/homophones/all_live",
        "All forms are live words",
    ),
    leaf(
        Normalizer,
        "normalizer/homophones",
        "normalizer/homophones/one_live",
        "Just one form is live",
    ),
    leaf(
        Tokenizer,
        "tokenizer/joined_terms",
        "tokenizer/joined_terms",
        "Terms joined without separator",
    ),
    leaf(
        Tokenizer,
        "tokenizer/phrases",
        "tokenizer/phrases/two_part_verbs",
        "Two part verbs",
    ),
    leaf(
        Tokenizer,
        "tokenizer/phrases",
        "tokenizer/phrases/multi_part_verbs",
        "Three to five part verbs with a plural suffix",
    ),
    leaf(
        Tokenizer,
        "tokenizer/phrases",
        "tokenizer/phrases/named_entities",
        "Named entities prepended by identifiers",
    ),
    leaf(
        SpellCorrection,
        "spell_correction/lexicon",
        "spell_correction/lexicon",
        "Lexicon",
    ),
    leaf(
        SpellCorrection,
        "spell_correction/inflection",
        "spell_correction/inflection",
        "Inflection",
    ),
    leaf(
        SpellCorrection,
        "spell_correction/homonyms",
        "spell_correction/homonyms",
        "Homonyms",
    ),
    leaf(
        SpellCorrection,
        "spell_correction/word_frequency",
        "spell_correction/word_frequency",
        "Frequency of words",
    ),
    leaf(
        SpellCorrection,
        "spell_correction/keyboard_order",
        "spell_correction/keyboard_order",
        "Keyboard order",
    ),
    leaf(
        QueryExpansion,
        "query_expansion/synonyms",
        "query_expansion/synonyms",
        "Synonyms",
    ),
    leaf(
        QueryExpansion,
        "query_expansion/abbreviations",
        "query_expansion/abbreviations",
        "Abbreviations",
    ),
    DomainLeaf {
        path: "query_expansion/punctuations",
        label: "Punctuations",
        component: QueryExpansion,
        group: "query_expansion/punctuations",
        supported: false,
    },
    leaf(
        Ranking,
        "ranking/navigational",
        "ranking/navigational",
        "Navigational queries",
    ),
    leaf(
        Ranking,
        "ranking/trend_single_url",
        "ranking/trend_single_url",
        "Trends with single URL",
    ),
    leaf(
        Ranking,
        "ranking/known_items",
        "ranking/known_items",
        "Known items",
    ),
];

/// Read-only handle on the built-in taxonomy.
#[derive(Debug, Clone, Copy, Default)]
pub struct DomainTaxonomy;

impl DomainTaxonomy {
    pub fn builtin() -> DomainTaxonomy {
        DomainTaxonomy
    }

    /// All leaves in document order.
    pub fn all_leaves(&self) -> &'static [DomainLeaf] {
        &LEAVES
    }

    pub fn leaf(&self, path: &str) -> Option<&'static DomainLeaf> {
        LEAVES.iter().find(|l| l.path == path)
    }

    /// Index of a leaf in document order, for stable sorting.
    pub fn position(&self, path: &str) -> Option<usize> {
        LEAVES.iter().position(|l| l.path == path)
    }

    pub fn groups(&self, component: Component) -> impl Iterator<Item = &'static DomainGroup> {
        GROUPS.iter().filter(move |g| g.component == component)
    }

    pub fn group(&self, path: &str) -> Option<&'static DomainGroup> {
        GROUPS.iter().find(|g| g.path == path)
    }

    pub fn leaves_in(&self, component: Component) -> impl Iterator<Item = &'static DomainLeaf> {
        LEAVES.iter().filter(move |l| l.component == component)
    }
}

/// Leaf paths of one component (or of every component when `None`), in
/// document order.
pub fn taxonomy_leaves(component: Option<Component>) -> Vec<&'static str> {
    LEAVES
        .iter()
        .filter(|l| component.is_none_or(|c| l.component == c))
        .map(|l| l.path)
        .collect()
}

/// Same as [`taxonomy_leaves`] but takes a component id or `"all"`.
pub fn taxonomy_leaves_by_id(id: &str) -> Result<Vec<&'static str>, CoreError> {
    if id == "all" || id == "*" {
        return Ok(taxonomy_leaves(None));
    }
    Ok(taxonomy_leaves(Some(id.parse()?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn normalizer_has_eleven_leaves() {
        assert_eq!(taxonomy_leaves(Some(Normalizer)).len(), 11);
    }

    #[test]
    fn tokenizer_has_four_leaves() {
        assert_eq!(taxonomy_leaves(Some(Tokenizer)).len(), 4);
    }

    #[test]
    fn spell_correction_has_five_leaves() {
        let leaves = taxonomy_leaves(Some(SpellCorrection));
        assert_eq!(leaves.len(), 5);
        assert_eq!(leaves[0], "spell_correction/lexicon");
        assert_eq!(leaves[4], "spell_correction/keyboard_order");
    }

    #[test]
    fn expansion_has_punctuations_flagged_unsupported() {
        let t = DomainTaxonomy::builtin();
        let leaves: Vec<_> = t.leaves_in(QueryExpansion).collect();
        assert_eq!(leaves.len(), 3);
        assert!(leaves[0].supported && leaves[1].supported);
        assert!(!t.leaf("query_expansion/punctuations").unwrap().supported);
    }

    #[test]
    fn ranking_includes_trends_with_single_url() {
        let t = DomainTaxonomy::builtin();
        let leaves = taxonomy_leaves(Some(Ranking));
        assert_eq!(leaves.len(), 3);
        assert!(leaves
            .iter()
            .any(|p| t.leaf(p).unwrap().label == "Trends with single URL"));
    }

    #[test]
    fn paths_are_unique_and_prefixed_by_component() {
        let all = taxonomy_leaves(None);
        let unique: BTreeSet<_> = all.iter().collect();
        assert_eq!(unique.len(), all.len());
        for l in DomainTaxonomy::builtin().all_leaves() {
            assert!(l.path.starts_with(l.component.as_str()));
            assert!(l.path.starts_with(l.group));
            let g = DomainTaxonomy::builtin().group(l.group).unwrap();
            assert_eq!(g.component, l.component);
        }
    }

    #[test]
    fn normalizer_has_three_groups() {
        assert_eq!(DomainTaxonomy::builtin().groups(Normalizer).count(), 3);
    }

    #[test]
    fn leaves_by_id() {
        assert_eq!(taxonomy_leaves_by_id("all").unwrap().len(), 26);
        assert!(matches!(
            taxonomy_leaves_by_id("crawler"),
            Err(CoreError::UnknownComponent(_))
        ));
    }
}
