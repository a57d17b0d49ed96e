#pragma once

// Image -> superpixels -> features -> affinity -> constrained extraction ->
// mask. Scribble kinds return the union of extracted clusters; box kinds
// return its complement.

#include <string>
#include <vector>

#include <json.hpp>

#include "cds/affinity.hpp"
#include "cds/annotation.hpp"
#include "cds/extraction.hpp"
#include "cds/features.hpp"
#include "cds/image.hpp"
#include "cds/superpixels.hpp"

namespace cds::seg {

struct PipelineSettings {
    int superpixels = 200;
    SigmaStrategy sigma = SigmaStrategy::single(0.15);
    SlicSettings slic;
    ExtractionSettings extraction;

    void validate() const;
};

/// Everything that depends on the image alone.
struct PreparedImage {
    Image image;
    SuperpixelMap superpixels;
    std::vector<FeatureVector> features;
};

PreparedImage prepare_image(Image image, int superpixels, const SlicSettings& slic = {});

struct SegmentationResult {
    Mask mask;
    AnnotationKind kind = AnnotationKind::kScribbleForeground;
    AnnotationConstraints constraints;
    ExtractionResult extraction;
    /// Parallel to extraction.clusters: dropped for touching a bg scribble.
    std::vector<bool> discarded;
    /// Superpixels painted as foreground.
    VertexSet foreground;
    int superpixel_count = 0;
    std::string sigma;
    std::vector<std::string> warnings;
};

/// Pixels of the listed superpixels.
Mask mask_from_superpixels(const SuperpixelMap& superpixels, const VertexSet& selected);

/// Runs extraction on an already built affinity. Dispatches on the
/// annotation kind; scribble-with-errors goes through the error-tolerant rule.
SegmentationResult segment_with_affinity(const PreparedImage& prepared, const AffinityMatrix& affinity,
                                         const Annotation& annotation, const ExtractionSettings& extraction,
                                         const std::string& sigma_key = {});

SegmentationResult segment(const Image& image, const Annotation& annotation, const PipelineSettings& settings);
SegmentationResult segment(const PreparedImage& prepared, const Annotation& annotation,
                           const PipelineSettings& settings);

/// S = fg-scribbled superpixels; every cluster containing a bg-scribbled
/// superpixel is discarded and the mask is the union of the rest. Requires
/// kind scribble-with-errors. An all-discarded run yields an empty mask and a
/// warning.
SegmentationResult segment_error_tolerant(const PreparedImage& prepared, const Annotation& annotation,
                                          const PipelineSettings& settings);

/// Deterministic summary: no timing, fixed key order, doubles printed
/// round-trip exact.
nlohmann::ordered_json diagnostics_json(const SegmentationResult& result);

} // namespace cds::seg
