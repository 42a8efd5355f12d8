#pragma once

#include <stdexcept>
#include <string>

namespace drl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// graph parsing / validation
struct MalformedDocument : Error { using Error::Error; };
struct SchemaViolation : Error { using Error::Error; };
struct IntegrityViolation : Error { using Error::Error; };
struct CycleDetected : Error { using Error::Error; };

// discrepancy
struct MatcherFailure : Error { using Error::Error; };
struct InstanceTooLarge : Error { using Error::Error; };

// knowledge base
struct StoreWriteFailure : Error { using Error::Error; };
struct StoreCorrupt : Error { using Error::Error; };
struct UnknownDocument : Error { using Error::Error; };

// provider
struct ProviderFailure : Error { using Error::Error; };
struct ScriptMiss : ProviderFailure { using ProviderFailure::ProviderFailure; };

// mining / inference
struct ExtractionFailure : Error { using Error::Error; };
struct AnswerParseFailure : Error { using Error::Error; };
struct JudgeParseFailure : Error { using Error::Error; };
struct InsightParseFailure : Error { using Error::Error; };
struct PromptBudgetExceeded : Error { using Error::Error; };
struct DatasetFormatFailure : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace drl
