#include "cds/segmentation.hpp"

#include "cds/error.hpp"

namespace cds::seg {

void PipelineSettings::validate() const {
    if (superpixels < kMinSuperpixels || superpixels > kMaxSuperpixels) {
        throw InvalidArgument("superpixel target must lie in [" + std::to_string(kMinSuperpixels) + ", " +
                              std::to_string(kMaxSuperpixels) + "]");
    }
    sigma.validate();
    if (!(extraction.margin > 0.0)) throw InvalidArgument("margin must be positive");
    extraction.solver.validate();
}

PreparedImage prepare_image(Image image, int superpixels, const SlicSettings& slic) {
    PreparedImage p;
    p.superpixels = compute_superpixels(image, superpixels, slic);
    p.features = extract_features(image, p.superpixels);
    p.image = std::move(image);
    return p;
}

Mask mask_from_superpixels(const SuperpixelMap& sp, const VertexSet& selected) {
    std::vector<char> on(static_cast<std::size_t>(sp.count), 0);
    for (Vertex v : selected) on[static_cast<std::size_t>(v)] = 1;
    Mask m(sp.width, sp.height);
    for (int y = 0; y < sp.height; ++y)
        for (int x = 0; x < sp.width; ++x) m.set(x, y, on[static_cast<std::size_t>(sp.label(x, y))]);
    return m;
}

SegmentationResult segment_with_affinity(const PreparedImage& prepared, const AffinityMatrix& affinity,
                                         const Annotation& annotation, const ExtractionSettings& extraction,
                                         const std::string& sigma_key) {
    const SuperpixelMap& sp = prepared.superpixels;
    if (affinity.size() != sp.count) throw InvalidArgument("affinity size does not match the superpixel count");
    SegmentationResult r;
    r.kind = annotation.kind;
    r.superpixel_count = sp.count;
    r.sigma = sigma_key;
    r.constraints = annotation_to_constraints(annotation, sp);
    r.extraction = extract_constrained_clusters(affinity, ConstraintSet(r.constraints.constraints), extraction);
    r.discarded.assign(r.extraction.clusters.size(), false);

    if (annotation.kind == AnnotationKind::kScribbleWithErrors) {
        VertexSet kept;
        for (std::size_t c = 0; c < r.extraction.clusters.size(); ++c) {
            const auto& support = r.extraction.clusters[c].support;
            if (!set_intersection(support, r.constraints.background_marked).empty()) {
                r.discarded[c] = true;
            } else {
                kept = set_union(kept, support);
            }
        }
        if (kept.empty()) r.warnings.push_back("every extracted cluster touches a background scribble; mask is empty");
        r.foreground = kept;
    } else if (r.constraints.extracted_is_foreground) {
        r.foreground = r.extraction.union_of_supports;
    } else {
        r.foreground = set_difference(VertexSet::range(sp.count), r.extraction.union_of_supports);
    }
    r.mask = mask_from_superpixels(sp, r.foreground);
    return r;
}

SegmentationResult segment(const PreparedImage& prepared, const Annotation& annotation,
                           const PipelineSettings& settings) {
    settings.validate();
    std::vector<std::string> warnings;
    const AffinityMatrix a = build_affinity(prepared.features, settings.sigma, &warnings);
    SegmentationResult r = segment_with_affinity(prepared, a, annotation, settings.extraction, settings.sigma.key());
    r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
    return r;
}

SegmentationResult segment(const Image& image, const Annotation& annotation, const PipelineSettings& settings) {
    settings.validate();
    annotation.validate();
    return segment(prepare_image(image, settings.superpixels, settings.slic), annotation, settings);
}

SegmentationResult segment_error_tolerant(const PreparedImage& prepared, const Annotation& annotation,
                                          const PipelineSettings& settings) {
    if (annotation.kind != AnnotationKind::kScribbleWithErrors) {
        throw AnnotationError("error-tolerant segmentation needs a scribble-with-errors annotation");
    }
    return segment(prepared, annotation, settings);
}

nlohmann::ordered_json diagnostics_json(const SegmentationResult& r) {
    nlohmann::ordered_json doc;
    doc["kind"] = to_string(r.kind);
    doc["superpixels"] = r.superpixel_count;
    doc["sigma"] = r.sigma;
    doc["constraints"] = r.constraints.constraints.members();
    doc["extracted_is_foreground"] = r.constraints.extracted_is_foreground;
    if (!r.constraints.background_marked.empty()) doc["background_marked"] = r.constraints.background_marked.members();
    if (r.constraints.effective_box) {
        const Box& b = *r.constraints.effective_box;
        doc["effective_box"] = {b.x, b.y, b.width, b.height};
    }
    doc["cluster_count"] = r.extraction.clusters.size();
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < r.extraction.clusters.size(); ++c) {
        const auto& k = r.extraction.clusters[c];
        nlohmann::ordered_json e;
        e["support"] = k.support.members();
        e["active_constraints"] = k.active_constraints.members();
        e["alpha"] = k.alpha;
        e["spectral_bound"] = k.bound.value;
        e["objective"] = k.objective;
        e["kkt_residual"] = k.kkt_residual;
        e["iterations"] = k.iterations;
        e["refinement_iterations"] = k.refinement_iterations;
        e["converged"] = k.converged;
        e["discarded"] = static_cast<bool>(r.discarded[c]);
        clusters.push_back(std::move(e));
    }
    doc["clusters"] = std::move(clusters);
    doc["foreground_superpixels"] = r.foreground.size();
    doc["foreground_pixels"] = r.mask.count();
    doc["warnings"] = r.warnings;
    return doc;
}

} // namespace cds::seg
