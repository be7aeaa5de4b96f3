#pragma once

// Bundled default resources: the mini emotion lexicon and the stock
// "not trained" / human-request pattern lists.

#include <string_view>

namespace egr {

/// `word,emotion,weight` lines.
std::string_view builtin_lexicon_text();

/// One pattern per line; `re:` selects regex mode.
std::string_view builtin_not_trained_patterns();
std::string_view builtin_human_request_patterns();

}  // namespace egr
