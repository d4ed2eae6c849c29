// SPDX-License-Identifier: Apache-2.0

//! Result computations over a scored population.

pub mod anova;
pub mod audience;
pub mod influence;
pub mod popular;
pub mod roles;
pub mod rwc;
pub mod svg;

pub use anova::{anova_f, AnovaResult};
pub use audience::{audience_distribution, AudienceCell, AudienceReport, GroupShares, VerifiedSplit};
pub use influence::{influence_report, top_k_users, InfluenceReport, InfluenceRow};
pub use popular::{popular_users, PopularLists, PopularUser};
pub use roles::{role_statistics, RoleAnova, RoleCell, RoleMetric, RoleReport};
pub use rwc::{
    authoritative_nodes, node_deciles, rwc_matrix, rwc_with_assignment, walk_endpoint, Authoritative, RwcMatrix,
    StepRule, WalkConfig, DECILES,
};
pub use svg::rwc_heatmap_svg;
