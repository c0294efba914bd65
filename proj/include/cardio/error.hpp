#pragma once

#include <stdexcept>
#include <string>

namespace cardio {

/// Base of every error the toolkit throws. `category()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Category { config, data, training, artifact };

  Error(Category c, const std::string& what) : std::runtime_error(what), category_(c) {}
  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

#define CARDIO_DEFINE_ERROR(Name, Cat)                                        \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(Category::Cat, what) {}    \
  };

// Configuration and shape problems.
CARDIO_DEFINE_ERROR(ConfigError, config)
CARDIO_DEFINE_ERROR(ShapeError, config)

// Input data problems.
CARDIO_DEFINE_ERROR(SchemaError, data)
CARDIO_DEFINE_ERROR(ParseError, data)
CARDIO_DEFINE_ERROR(EmptyInputError, data)
CARDIO_DEFINE_ERROR(DomainError, data)
CARDIO_DEFINE_ERROR(InsufficientDataError, data)
CARDIO_DEFINE_ERROR(StratificationError, data)
CARDIO_DEFINE_ERROR(DegenerateFeatureError, data)

// Model fitting.
CARDIO_DEFINE_ERROR(TrainingError, training)
CARDIO_DEFINE_ERROR(DivergenceError, training)

// Artifact decoding.
CARDIO_DEFINE_ERROR(NotAModelError, artifact)
CARDIO_DEFINE_ERROR(TruncatedArtifactError, artifact)
CARDIO_DEFINE_ERROR(ChecksumError, artifact)
CARDIO_DEFINE_ERROR(VersionError, artifact)
CARDIO_DEFINE_ERROR(ArtifactFormatError, artifact)

#undef CARDIO_DEFINE_ERROR

}  // namespace cardio
