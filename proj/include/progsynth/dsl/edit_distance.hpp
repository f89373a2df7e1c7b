// Copyright 2026 The progsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "progsynth/dsl/ast.hpp"

namespace progsynth::dsl {

/*!
 * \brief Number of statement edits turning `a` into `b`.
 *
 * Computed as an ordered tree edit distance over the statement tree with
 * unit insert/delete/relabel costs. Node labels are the action name or the
 * construct header (kind plus condition or repeat count); an IFELSE owns an
 * extra ELSE node holding the else-branch. Relabeling a construct (new
 * condition, new count) costs 1, and wrapping existing statements in a new
 * construct costs 1 because the body is moved, not re-added. For
 * straight-line programs this is the Levenshtein distance over actions.
 */
int statement_edit_distance(const Program& a, const Program& b);

}  // namespace progsynth::dsl
