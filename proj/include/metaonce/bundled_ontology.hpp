#pragma once

#include <string_view>

namespace metaonce {

// Vocabulary used by the three demo scenes. Mirrors data/ontology.json.
inline constexpr std::string_view bundled_ontology_json = R"json({
  "concepts": [
    {"id": "/Thing", "label": "Thing", "parent": null},
    {"id": "/Thing/Person", "label": "Person", "parent": "/Thing"},
    {"id": "/Thing/Product", "label": "Product", "parent": "/Thing"},
    {"id": "/Thing/Organization", "label": "Organization", "parent": "/Thing"},
    {"id": "/Thing/Place", "label": "Place", "parent": "/Thing"}
  ],
  "relations": [
    {"id": "BefriendAction", "label": "befriend", "subject": "/Thing/Person", "object": "/Thing/Person", "rules": []},
    {"id": "FollowAction", "label": "follow", "subject": "/Thing/Person", "object": "/Thing", "rules": []},
    {"id": "MarryAction", "label": "marry", "subject": "/Thing/Person", "object": "/Thing/Person",
     "rules": ["exclusive", "symmetric", "irreversible"], "companion": "MarryAction",
     "messages": {
       "exclusive_conflict": "Sorry, you can't marry this person because {holder} is already married to this person",
       "irreversible_ban": "Sorry, the two of you are divorced and can't be together anymore."
     }},
    {"id": "BuyAction", "label": "buy", "subject": "/Thing", "object": "/Thing/Product",
     "rules": ["exclusive", "co_occurrence", "mutual_termination"], "companion": "BelongsTo",
     "messages": {
       "exclusive_conflict": "Sorry, you can't buy it, it's {holder}'s property."
     }},
    {"id": "JoinAction", "label": "join", "subject": "/Thing/Person", "object": "/Thing/Organization", "rules": []},
    {"id": "LeaveAction", "label": "leave", "subject": "/Thing/Person", "object": "/Thing/Organization", "rules": []},
    {"id": "BelongsTo", "label": "belongs to", "subject": "/Thing/Product", "object": "/Thing", "rules": []},
    {"id": "Make", "label": "make", "subject": "/Thing", "object": "/Thing/Product", "rules": []},
    {"id": "Leader", "label": "leads", "subject": "/Thing/Person", "object": "/Thing/Organization", "rules": []}
  ],
  "events": [
    {"id": "Divorce", "label": "divorce"},
    {"id": "Sell", "label": "sell"}
  ]
}
)json";

}  // namespace metaonce
