//! Meme features: user, mention, retweet, message and URL counts/fractions.

use std::collections::BTreeSet;

use crate::model::TopicSnapshot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemeFeatures {
    pub users: f64,
    pub user_fraction: f64,
    pub mentions: f64,
    pub mention_fraction: f64,
    pub retweets: f64,
    pub retweet_fraction: f64,
    pub messages: f64,
    pub url_fraction: f64,
}

/// `active_users` is everyone posting anything in the snapshot's bucket.
pub fn meme_features(snapshot: &TopicSnapshot<'_>, active_users: &BTreeSet<&str>) -> MemeFeatures {
    let n = snapshot.messages.len();
    if n == 0 {
        return MemeFeatures {
            users: 0.0,
            user_fraction: 0.0,
            mentions: 0.0,
            mention_fraction: 0.0,
            retweets: 0.0,
            retweet_fraction: 0.0,
            messages: 0.0,
            url_fraction: 0.0,
        };
    }
    let nf = n as f64;
    let users = snapshot.users.len() as f64;
    // Snapshot authors post in this bucket, so the active set covers them.
    let active = active_users.union(&snapshot.users).count() as f64;
    let mentions = snapshot.messages.iter().filter(|m| !m.mentions.is_empty()).count() as f64;
    let retweets = snapshot.messages.iter().filter(|m| m.retweet_of.is_some()).count() as f64;
    let with_url = snapshot.messages.iter().filter(|m| m.urls > 0).count() as f64;
    MemeFeatures {
        users,
        user_fraction: users / active,
        mentions,
        mention_fraction: mentions / nf,
        retweets,
        retweet_fraction: retweets / nf,
        messages: nf,
        url_fraction: with_url / nf,
    }
}
