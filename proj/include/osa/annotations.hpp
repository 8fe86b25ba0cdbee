#ifndef OSA_ANNOTATIONS_HPP
#define OSA_ANNOTATIONS_HPP

#include <string>
#include <vector>

#include "osa/subject.hpp"

namespace osa {

// Scored-event annotation documents: <ScoredEvent> elements carrying a
// Name (or EventConcept) tag plus Start and Duration in decimal seconds.
// Returns the events whose name matches any pattern (case-insensitive
// substring), sorted by start time.
//
// Errors: MalformedXml on broken markup, MissingField when a scored event
// lacks Start or Duration.
std::vector<EventAnnotation> parse_annotations(const std::string& xml_text,
                                               const std::vector<std::string>& name_patterns);

// Serializes events in the same document shape parse_annotations accepts.
std::string render_annotations(const std::vector<EventAnnotation>& events);

}  // namespace osa

#endif  // OSA_ANNOTATIONS_HPP
