//! Conversation-style instruction examples: one question per requested
//! entity type, answers as JSON lists of gold surfaces.

use dnm_core::EntityType;
use serde::{Deserialize, Serialize};

use crate::align::AnnotatedListing;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationTurn {
    pub from: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationExample {
    pub page_id: String,
    pub passage: String,
    /// (question, answer surfaces) per requested type, in request order.
    pub turns: Vec<(String, Vec<String>)>,
}

/// Build the instruction example for a listing. Types with no gold span get
/// an empty answer list.
pub fn to_conversation(listing: &AnnotatedListing, types: &[EntityType]) -> ConversationExample {
    let passage = listing.tokens.join(" ");
    let turns = types
        .iter()
        .map(|&t| {
            let answers: Vec<String> = listing
                .spans
                .iter()
                .filter(|s| s.entity_type == t)
                .map(|s| s.surface.clone())
                .collect();
            (format!("What describes {t} in the text?"), answers)
        })
        .collect();
    ConversationExample {
        page_id: listing.page_id.clone(),
        passage,
        turns,
    }
}

impl ConversationExample {
    /// Flatten to wire turns: the passage from the human side, then each
    /// question/answer pair; answers are serialized JSON lists.
    pub fn wire_turns(&self) -> Vec<ConversationTurn> {
        let mut turns = vec![ConversationTurn {
            from: "human".into(),
            value: self.passage.clone(),
        }];
        for (question, answers) in &self.turns {
            turns.push(ConversationTurn {
                from: "human".into(),
                value: question.clone(),
            });
            turns.push(ConversationTurn {
                from: "gpt".into(),
                value: serde_json::to_string(answers).expect("string list"),
            });
        }
        turns
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::TokenSpan;
    use dnm_core::{Language, MarketId};

    fn listing() -> AnnotatedListing {
        AnnotatedListing {
            page_id: "p0".into(),
            market_id: MarketId::AgarthaItem,
            language: Language::En,
            tokens: "alice sells 10g hash".split(' ').map(String::from).collect(),
            spans: vec![TokenSpan {
                entity_type: EntityType::Product,
                tok_start: 2,
                tok_end: 3,
                surface: "10g hash".into(),
            }],
        }
    }

    #[test]
    fn question_form_and_answers() {
        let ex = to_conversation(&listing(), &[EntityType::Product]);
        assert_eq!(ex.turns[0].0, "What describes product in the text?");
        assert_eq!(ex.turns[0].1, vec!["10g hash".to_string()]);
    }

    #[test]
    fn absent_type_gets_empty_list_and_order_is_preserved() {
        let ex = to_conversation(
            &listing(),
            &[EntityType::VendorName, EntityType::Product],
        );
        assert_eq!(ex.turns.len(), 2);
        assert_eq!(ex.turns[0].0, "What describes vendor_name in the text?");
        assert!(ex.turns[0].1.is_empty());
        assert_eq!(ex.turns[1].1, vec!["10g hash".to_string()]);
        let wire = ex.wire_turns();
        assert_eq!(wire[0].from, "human");
        assert_eq!(wire[0].value, "alice sells 10g hash");
        assert_eq!(wire[2].value, "[]");
        assert_eq!(wire[4].value, "[\"10g hash\"]");
    }

    #[test]
    fn answers_are_substrings_of_the_passage() {
        let ex = to_conversation(&listing(), &[EntityType::Product]);
        for (_, answers) in &ex.turns {
            for a in answers {
                assert!(ex.passage.contains(a));
            }
        }
    }
}
