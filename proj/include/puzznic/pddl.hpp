#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "puzznic/engine.hpp"
#include "puzznic/error.hpp"
#include "puzznic/grid.hpp"

// PDDL 2.2 export: one fixed domain, one problem per level. Locations are the
// non-wall cells, so walls exist only as missing `next` facts.

namespace puzznic {

inline std::string export_pddl_domain() {
  return R"((define (domain puzznic)
  (:requirements :typing :negative-preconditions :disjunctive-preconditions :equality
                 :existential-preconditions :universal-preconditions :conditional-effects
                 :derived-predicates :action-costs)
  (:types location direction pattern)
  (:constants up down left right - direction)
  (:predicates
    (patterned ?l - location ?p - pattern)
    (next ?from ?to - location ?dir - direction)
    (free ?l - location)
    (falling_flag)
    (matching_flag))
  (:functions (total-cost) - number)

  ; a location is free if it holds no pattern
  (:derived (free ?l - location)
    (forall (?p - pattern) (not (patterned ?l ?p))))

  ; is there something that needs to fall?
  (:derived (falling_flag)
    (exists (?l1 ?l2 - location) (and (next ?l1 ?l2 down) (not (free ?l1)) (free ?l2))))

  ; is there something that needs to match?
  (:derived (matching_flag)
    (exists (?l1 ?l2 - location ?p - pattern ?d - direction)
      (and (next ?l1 ?l2 ?d) (patterned ?l1 ?p) (patterned ?l2 ?p))))

  (:action fall_block
    :parameters (?l1 ?l2 - location ?p - pattern)
    :precondition
    (and
      (falling_flag)
      (next ?l1 ?l2 down)
      (patterned ?l1 ?p)
      (free ?l2))
    :effect
    (and (not (patterned ?l1 ?p)) (patterned ?l2 ?p)))

  (:action match_blocks
    :parameters ()
    :precondition
    (and
      (not (falling_flag))
      (matching_flag))
    :effect
    (forall (?l1 - location ?p - pattern)
      (when
        (exists (?l2 - location ?d - direction)
          (and (next ?l1 ?l2 ?d) (patterned ?l1 ?p) (patterned ?l2 ?p)))
        (not (patterned ?l1 ?p)))))

  (:action move_block
    :parameters (?l ?tl - location ?d - direction ?p - pattern)
    :precondition
    (and
      (not (falling_flag)) (not (matching_flag))
      (or (= ?d right) (= ?d left))
      (patterned ?l ?p)
      (next ?l ?tl ?d) (free ?tl))
    :effect
    (and
      (not (patterned ?l ?p)) (patterned ?tl ?p)
      (increase (total-cost) 1)))
)
)";
}

struct PddlNext {
  Position from;
  Position to;
  std::string dir;
  auto operator<=>(const PddlNext&) const = default;
};

struct PddlProblem {
  std::string name;
  std::vector<Position> locations;  // row-major
  std::vector<PddlNext> next;
  std::vector<int> patterns;        // ids present, ascending
  std::vector<std::pair<Position, int>> patterned;
};

inline std::string pddl_location(Position p) {
  return "loc_" + std::to_string(p.row) + "_" + std::to_string(p.col);
}

inline std::string pddl_pattern(int id) { return "pat" + std::to_string(id); }

/// Every `next` fact has its reverse in the opposite direction, joins two
/// distinct declared locations, and moves exactly one step that way.
inline bool adjacency_consistent(const PddlProblem& p) {
  auto opposite = [](const std::string& d) {
    return d == "up" ? "down" : d == "down" ? "up" : d == "left" ? "right" : "left";
  };
  std::set<PddlNext> facts(p.next.begin(), p.next.end());
  std::set<Position> locs(p.locations.begin(), p.locations.end());
  for (const PddlNext& n : p.next) {
    if (n.from == n.to || !locs.count(n.from) || !locs.count(n.to)) return false;
    const int dr = n.to.row - n.from.row, dc = n.to.col - n.from.col;
    const bool step = (n.dir == "up" && dr == -1 && dc == 0) || (n.dir == "down" && dr == 1 && dc == 0) ||
                      (n.dir == "left" && dr == 0 && dc == -1) || (n.dir == "right" && dr == 0 && dc == 1);
    if (!step || !facts.count({n.to, n.from, opposite(n.dir)})) return false;
  }
  return true;
}

inline PddlProblem build_pddl_problem(const Grid& level, const std::string& name) {
  if (!level.has_wall_perimeter()) throw Error(ErrorKind::LevelInvalid, "grid lacks a wall perimeter");
  PddlProblem out;
  out.name = name;
  for (int r = 1; r <= level.height(); ++r)
    for (int c = 1; c <= level.width(); ++c)
      if (!level.at(r, c).is_wall()) out.locations.push_back({r, c});
  static const std::tuple<int, int, const char*> kDirs[] = {
      {-1, 0, "up"}, {1, 0, "down"}, {0, -1, "left"}, {0, 1, "right"}};
  for (Position p : out.locations)
    for (auto [dr, dc, dir] : kDirs)
      if (!level.at(p.row + dr, p.col + dc).is_wall()) out.next.push_back({p, {p.row + dr, p.col + dc}, dir});
  PatternCounts pc = pattern_counts(level);
  for (int id = 1; id <= kMaxPatterns; ++id)
    if (pc[id] > 0) out.patterns.push_back(id);
  for (Position p : out.locations)
    if (level.at(p).is_pattern()) out.patterned.push_back({p, level.at(p).pattern_id()});
  if (!adjacency_consistent(out)) throw Error(ErrorKind::LevelInvalid, "adjacency facts are not symmetric");
  return out;
}

inline std::string emit_pddl_problem(const PddlProblem& p) {
  std::string out = "(define (problem " + p.name + ")\n  (:domain puzznic)\n  (:objects\n";
  for (Position l : p.locations) out += "    " + pddl_location(l) + "\n";
  if (!p.locations.empty()) out += "    - location\n";
  if (!p.patterns.empty()) {
    out += "   ";
    for (int id : p.patterns) out += " " + pddl_pattern(id);
    out += " - pattern\n";
  }
  out += "  )\n  (:init\n    (= (total-cost) 0)\n";
  for (const PddlNext& n : p.next)
    out += "    (next " + pddl_location(n.from) + " " + pddl_location(n.to) + " " + n.dir + ")\n";
  for (auto [l, id] : p.patterned) out += "    (patterned " + pddl_location(l) + " " + pddl_pattern(id) + ")\n";
  out += "  )\n";
  out += "  (:goal (forall (?l - location) (not (exists (?p - pattern) (patterned ?l ?p)))))\n";
  out += "  (:metric minimize (total-cost))\n)\n";
  return out;
}

/// PDDL names start with a letter and use letters, digits, '-' and '_'.
inline std::string pddl_name(const std::string& raw) {
  std::string out;
  for (char ch : raw) out.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ? ch : '-');
  if (out.empty() || !std::isalpha(static_cast<unsigned char>(out[0]))) out = "level-" + out;
  return out;
}

inline std::string export_pddl_problem(const Grid& level, const std::string& name) {
  return emit_pddl_problem(build_pddl_problem(level, pddl_name(name)));
}

}  // namespace puzznic
