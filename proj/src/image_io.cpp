#include "jdpnet/image_io.hpp"

#include "jdpnet/errors.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

namespace jdp::io {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

ImageTensor from_interleaved_rgb(const std::vector<unsigned char>& pixels, std::size_t height, std::size_t width) {
    ImageTensor img(3, height, width);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = pixels[(y * width + x) * 3 + c] / 255.0;
        }
    }
    return img;
}

ImageTensor read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw InputError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
    png_color background{0, 0, 0};
    if (!png_image_finish_read(&image, &background, pixels.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw InputError("cannot decode PNG " + path.string() + ": " + message);
    }
    return from_interleaved_rgb(pixels, image.height, image.width);
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

ImageTensor read_jpeg(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) throw InputError("cannot open " + path.string());

    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    // no C++ objects with non-trivial destructors may be created between setjmp and longjmp
    std::vector<unsigned char> pixels;
    std::size_t width = 0;
    std::size_t height = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw InputError("cannot decode JPEG " + path.string() + ": " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = cinfo.output_width;
    height = cinfo.output_height;
    pixels.resize(width * height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_interleaved_rgb(pixels, height, width);
}

}  // namespace

std::uint8_t quantize(double v) noexcept {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

bool is_supported_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

ImageTensor read_image(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw InputError("not a readable file: " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".jpg" || ext == ".jpeg") return read_jpeg(path);
    throw InputError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw DimensionError("write_png expects 1 or 3 channels, got " + img.shape_string());
    }
    const std::size_t channels = img.channels();
    std::vector<unsigned char> pixels(img.size());
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            for (std::size_t c = 0; c < channels; ++c) pixels[(y * img.width() + x) * channels + c] = quantize(img.at(c, y, x));
        }
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
        throw InputError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

ImageTensor pad_to_multiple(const ImageTensor& img, std::size_t multiple) {
    if (multiple == 0) throw ParameterError("pad multiple must be >= 1");
    const std::size_t h = (img.height() + multiple - 1) / multiple * multiple;
    const std::size_t w = (img.width() + multiple - 1) / multiple * multiple;
    if (h == img.height() && w == img.width()) return img;
    ImageTensor out(img.channels(), h, w);
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                out.at(c, y, x) = img.at(c, std::min(y, img.height() - 1), std::min(x, img.width() - 1));
            }
        }
    }
    return out;
}

ImageTensor crop(const ImageTensor& img, std::size_t height, std::size_t width) {
    if (height > img.height() || width > img.width()) throw DimensionError("crop window exceeds the image");
    ImageTensor out(img.channels(), height, width);
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, y, x);
        }
    }
    return out;
}

}  // namespace jdp::io
