#include "oppnet/routing_table.hpp"

#include <algorithm>
#include <cmath>

namespace oppnet {

EdcResult compute_edc(std::vector<NeighborEdc> neighbors, double w) {
  std::erase_if(neighbors, [](const NeighborEdc& n) { return n.p_link <= 0.0; });
  std::sort(neighbors.begin(), neighbors.end(),
            [](const NeighborEdc& a, const NeighborEdc& b) {
              if (a.advertised_edc != b.advertised_edc)
                return a.advertised_edc < b.advertised_edc;
              return a.id < b.id;
            });

  EdcResult best;
  double sum_p = 0.0;
  double sum_pe = 0.0;
  for (size_t k = 0; k < neighbors.size(); ++k) {
    sum_p += neighbors[k].p_link;
    sum_pe += neighbors[k].p_link * neighbors[k].advertised_edc;
    double val = w + (1.0 + sum_pe) / sum_p;
    if (!best.edc || val < *best.edc) {
      best.edc = val;
      best.forwarder_set.clear();
      for (size_t i = 0; i <= k; ++i) best.forwarder_set.push_back(neighbors[i].id);
    }
  }
  return best;
}

RoutingTable::RoutingTable(NodeId self, bool is_sink,
                           const RoutingParams* params, TraceSink* trace)
    : self_(self), is_sink_(is_sink), params_(params), trace_(trace) {
  if (is_sink_) current_ = EdcResult{0.0, {}};
}

void RoutingTable::recompute(const std::vector<NeighborEdc>& neighbors,
                             TimeUs now) {
  if (is_sink_) return;  // sink pins EDC 0 with an empty forwarder set
  EdcResult next = compute_edc(neighbors, params_->w);
  bool changed = next.edc != current_.edc ||
                 next.forwarder_set != current_.forwarder_set;
  if (!changed) return;
  current_ = std::move(next);
  if (trace_) {
    Json rec;
    rec["kind"] = "edc_update";
    rec["node"] = self_;
    if (current_.edc) rec["edc"] = *current_.edc;
    else rec["edc"] = nullptr;
    rec["fwd"] = current_.forwarder_set;
    trace_->emit(now, std::move(rec));
  }
  if (changed_cb_) changed_cb_(now);
}

RoutingTable::UpwardCost RoutingTable::calculate_upwards_cost(
    NodeId dest, NodeId sink) const {
  if (dest != sink) return UpwardCost{false, std::nullopt};
  return UpwardCost{true, current_.edc};
}

Verdict RoutingTable::judge(const ForwarderCriteria& criteria, TimeUs now) {
  Verdict v = Verdict::Reject;
  PacketKey key{criteria.origin, criteria.packet_seq};
  if (criteria.metric == RouteMetric::DownwardSet && criteria.return_to) {
    // A stranded downward packet returning to its previous hop. That hop has
    // necessarily seen the packet already, so the duplicate check must not
    // apply to it. The final destination itself also captures the packet:
    // reaching it ends the search no matter which direction it travels.
    if (criteria.final_dest == self_ && !seen_.count(key)) {
      v = Verdict::Accept;
    } else {
      v = *criteria.return_to == self_ ? Verdict::Accept : Verdict::Reject;
    }
  } else if (seen_.count(key)) {
    v = Verdict::Reject;
  } else if (criteria.metric == RouteMetric::UpwardEdc) {
    if (current_.edc && criteria.sender_edc &&
        *current_.edc + params_->margin <= *criteria.sender_edc) {
      v = Verdict::Accept;
    }
  } else {
    if (criteria.final_dest == self_) {
      v = Verdict::Accept;
    } else if (downward_member_ && downward_member_(criteria.final_dest, now)) {
      // Set membership alone is not enough: everything higher on the
      // gradient floods into every set, so a sideways hop can strand the
      // packet where all eligible neighbors already rejected it as a
      // duplicate. Require strict descent (our EDC above the sender's) so
      // each hop moves away from the sink toward the destination's branch.
      if (!criteria.sender_edc ||
          (current_.edc && *current_.edc > *criteria.sender_edc)) {
        v = Verdict::Accept;
      }
    }
  }
  if (trace_) {
    Json rec;
    rec["kind"] = "judge";
    rec["node"] = self_;
    rec["origin"] = criteria.origin;
    rec["seq"] = criteria.packet_seq;
    rec["verdict"] = v == Verdict::Accept ? "accept" : "reject";
    rec["metric"] = criteria.metric == RouteMetric::UpwardEdc ? "up" : "down";
    if (criteria.sender_edc) rec["sender_edc"] = *criteria.sender_edc;
    if (criteria.return_to) rec["recovery"] = true;
    trace_->emit(now, std::move(rec));
  }
  return v;
}

void RoutingTable::reset_routes() {
  if (!is_sink_) current_ = EdcResult{};
}

}  // namespace oppnet
