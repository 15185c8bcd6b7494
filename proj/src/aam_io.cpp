#include <cstdint>
#include <fstream>
#include <vector>

#include "tface/aam.hpp"
#include "tface/errors.hpp"

namespace tface::aam {

namespace {

constexpr char kMagic[4] = {'A', 'A', 'M', '1'};
constexpr uint32_t kVersion = 1;

static_assert(__BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__,
              "AAM1 I/O assumes a little-endian host");

void put_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t get_u32(std::istream& in, const std::string& path) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError(path + ": truncated AAM1 header");
    return v;
}

void put_f32_array(std::ostream& out, const std::vector<float>& a) {
    const uint64_t len = a.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.size() * sizeof(float)));
}

std::vector<float> get_f32_array(std::istream& in, const std::string& path,
                                 uint64_t expected) {
    uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len != expected)
        throw IoError(path + ": bad AAM1 array length");
    std::vector<float> a(len);
    in.read(reinterpret_cast<char*>(a.data()),
            static_cast<std::streamsize>(len * sizeof(float)));
    if (!in) throw IoError(path + ": truncated AAM1 array");
    return a;
}

}  // namespace

void save_aam(const std::string& path, const AamModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");

    const auto& mesh = model.shape.mesh;
    const uint32_t nv = static_cast<uint32_t>(mesh.vertex_count());
    const uint32_t nt = static_cast<uint32_t>(mesh.triangle_count());
    const uint32_t frame = static_cast<uint32_t>(model.appearance.frame_width) *
                           static_cast<uint32_t>(model.appearance.frame_height);

    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, nv);
    put_u32(out, nt);
    put_u32(out, static_cast<uint32_t>(model.appearance.frame_width));
    put_u32(out, static_cast<uint32_t>(model.appearance.frame_height));
    put_u32(out, static_cast<uint32_t>(model.basis.cols()));
    put_u32(out, static_cast<uint32_t>(model.appearance.mode_count()));
    put_u32(out, static_cast<uint32_t>(model.n_similarity));

    std::vector<float> buf;
    buf.reserve(2 * nv);
    for (const auto& v : mesh.vertices) {
        buf.push_back(static_cast<float>(v.x));
        buf.push_back(static_cast<float>(v.y));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) put_u32(out, static_cast<uint32_t>(t[k]));

    buf.clear();
    for (const auto& v : model.shape.mean_shape) {
        buf.push_back(static_cast<float>(v.x));
        buf.push_back(static_cast<float>(v.y));
    }
    put_f32_array(out, buf);

    buf.assign(static_cast<size_t>(model.basis.size()), 0.0f);
    for (int c = 0, i = 0; c < model.basis.cols(); ++c)
        for (int r = 0; r < model.basis.rows(); ++r, ++i)
            buf[i] = static_cast<float>(model.basis(r, c));
    put_f32_array(out, buf);

    buf.resize(frame);
    for (size_t i = 0; i < frame; ++i) buf[i] = static_cast<float>(model.appearance.a0[i]);
    put_f32_array(out, buf);

    buf.assign(static_cast<size_t>(frame) * model.appearance.mode_count(), 0.0f);
    for (int k = 0, i = 0; k < model.appearance.mode_count(); ++k)
        for (size_t j = 0; j < frame; ++j, ++i)
            buf[i] = static_cast<float>(model.appearance.modes[k][j]);
    put_f32_array(out, buf);

    if (!out) throw IoError(path + ": write failed");
}

AamModel load_aam(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");

    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kMagic, 4))
        throw IoError(path + ": not an AAM1 file");
    const uint32_t version = get_u32(in, path);
    if (version != kVersion)
        throw IoError(path + ": unsupported AAM1 version " + std::to_string(version));

    const uint32_t nv = get_u32(in, path);
    const uint32_t nt = get_u32(in, path);
    const uint32_t fw = get_u32(in, path);
    const uint32_t fh = get_u32(in, path);
    const uint32_t n_basis = get_u32(in, path);
    const uint32_t n_app = get_u32(in, path);
    const uint32_t n_sim = get_u32(in, path);
    if (nv < 3 || nt < 1 || fw == 0 || fh == 0 || n_sim > n_basis ||
        nv > 100000 || nt > 200000 || fw > 1 << 16 || fh > 1 << 16)
        throw IoError(path + ": implausible AAM1 header");

    AamModel model;
    model.n_similarity = static_cast<int>(n_sim);

    auto& mesh = model.shape.mesh;
    {
        std::vector<float> buf(2 * static_cast<size_t>(nv));
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!in) throw IoError(path + ": truncated mesh vertices");
        mesh.vertices.resize(nv);
        for (uint32_t i = 0; i < nv; ++i)
            mesh.vertices[i] = {buf[2 * i], buf[2 * i + 1]};
        mesh.triangles.resize(nt);
        for (uint32_t t = 0; t < nt; ++t)
            for (int k = 0; k < 3; ++k)
                mesh.triangles[t][k] = static_cast<int>(get_u32(in, path));
        mesh.validate();
    }

    {
        const auto buf = get_f32_array(in, path, 2 * static_cast<uint64_t>(nv));
        model.shape.mean_shape.resize(nv);
        for (uint32_t i = 0; i < nv; ++i)
            model.shape.mean_shape[i] = {buf[2 * i], buf[2 * i + 1]};
    }
    {
        const auto buf =
            get_f32_array(in, path, 2 * static_cast<uint64_t>(nv) * n_basis);
        model.basis.resize(2 * nv, n_basis);
        for (uint32_t c = 0, i = 0; c < n_basis; ++c)
            for (uint32_t r = 0; r < 2 * nv; ++r, ++i) model.basis(r, c) = buf[i];
        model.shape.modes = model.basis.rightCols(n_basis - n_sim);
    }
    model.appearance.frame_width = static_cast<int>(fw);
    model.appearance.frame_height = static_cast<int>(fh);
    const uint64_t frame = static_cast<uint64_t>(fw) * fh;
    {
        const auto buf = get_f32_array(in, path, frame);
        model.appearance.a0 = ImageGrid(fw, fh);
        for (uint64_t i = 0; i < frame; ++i) model.appearance.a0[i] = buf[i];
    }
    {
        const auto buf = get_f32_array(in, path, frame * n_app);
        model.appearance.modes.assign(n_app, ImageGrid(fw, fh));
        for (uint32_t k = 0; k < n_app; ++k)
            for (uint64_t i = 0; i < frame; ++i)
                model.appearance.modes[k][i] = buf[k * frame + i];
    }

    model.finalize();
    return model;
}

}  // namespace tface::aam
