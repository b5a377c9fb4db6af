#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "naer/pipeline.hpp"

namespace py = pybind11;
using namespace naer;

namespace {

py::array_t<float> channels_to_array(const std::vector<std::vector<float>>& ch)
{
    const size_t rows = ch.size();
    const size_t cols = rows ? ch[0].size() : 0;
    py::array_t<float> out({rows, cols});
    auto buf = out.mutable_unchecked<2>();
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < cols; ++c) buf(r, c) = ch[r][c];
    }
    return out;
}

std::vector<float> array_to_channel(py::array_t<float, py::array::c_style> a)
{
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_naer, m)
{
    m.doc() = "Neuromorphic event compression simulator core";

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init([](uint16_t rows, uint16_t cols) {
                 return ArrayGeometry{rows, cols};
             }),
             py::arg("n_rows"), py::arg("n_cols"))
        .def_readwrite("n_rows", &ArrayGeometry::n_rows)
        .def_readwrite("n_cols", &ArrayGeometry::n_cols)
        .def("address_bits", &ArrayGeometry::address_bits)
        .def_static("near_square", &ArrayGeometry::near_square);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("fs_hz", &SynthConfig::fs_hz)
        .def_readwrite("duration_s", &SynthConfig::duration_s)
        .def_readwrite("firing_rate_hz", &SynthConfig::firing_rate_hz)
        .def_readwrite("noise_sigma", &SynthConfig::noise_sigma)
        .def_readwrite("template_id", &SynthConfig::template_id)
        .def_readwrite("seed", &SynthConfig::seed);

    m.def("generate_synthetic", [](const SynthConfig& cfg) {
        auto [rec, truth] = generate_synthetic(cfg);
        return py::make_tuple(channels_to_array(rec.channels),
                              truth.spike_times_s.empty()
                                  ? std::vector<double>{}
                                  : truth.spike_times_s[0]);
    });

    py::class_<AdmConfig>(m, "AdmConfig")
        .def(py::init<>())
        .def_readwrite("th_on", &AdmConfig::th_on)
        .def_readwrite("th_off", &AdmConfig::th_off)
        .def_readwrite("refractory_s", &AdmConfig::refractory_s);

    m.def(
        "calibrate_threshold",
        [](py::array_t<float, py::array::c_style> signal, double k) {
            const auto v = array_to_channel(signal);
            return calibrate_threshold(v, k);
        },
        py::arg("signal"), py::arg("k"));

    m.def(
        "encode_channel",
        [](py::array_t<float, py::array::c_style> signal, double fs_hz,
           const AdmConfig& cfg) {
            const auto v = array_to_channel(signal);
            const auto train = encode_channel(v, fs_hz, cfg);
            std::vector<int64_t> t;
            std::vector<int> p;
            for (const auto& ev : train.events) {
                t.push_back(ev.t_ns);
                p.push_back(ev.polarity);
            }
            return py::make_tuple(t, p);
        },
        py::arg("signal"), py::arg("fs_hz"), py::arg("cfg"));

    m.def(
        "rmse_normalized",
        [](py::array_t<float, py::array::c_style> ref,
           py::array_t<float, py::array::c_style> rec) {
            return rmse_normalized(array_to_channel(ref),
                                   array_to_channel(rec));
        });
    m.def("pearson_cc", [](py::array_t<float, py::array::c_style> ref,
                           py::array_t<float, py::array::c_style> rec) {
        return pearson_cc(array_to_channel(ref), array_to_channel(rec));
    });

    py::enum_<TransmissionMode>(m, "TransmissionMode")
        .value("APM", TransmissionMode::Apm)
        .value("PCM", TransmissionMode::Pcm)
        .value("SPDWOR", TransmissionMode::Spdwor)
        .value("FULL_SAMPLE", TransmissionMode::FullSample);

    py::class_<RateModelParams>(m, "RateModelParams")
        .def(py::init<>())
        .def_readwrite("geometry", &RateModelParams::geometry)
        .def_readwrite("f_neu", &RateModelParams::f_neu)
        .def_readwrite("n_ap", &RateModelParams::n_ap)
        .def_readwrite("r_noise", &RateModelParams::r_noise)
        .def_readwrite("alpha_b", &RateModelParams::alpha_b)
        .def_readwrite("bins_per_s", &RateModelParams::bins_per_s)
        .def_readwrite("pcm_count_bits", &RateModelParams::pcm_count_bits)
        .def_readwrite("b_adc", &RateModelParams::b_adc)
        .def_readwrite("n_spike", &RateModelParams::n_spike)
        .def_readwrite("fs_hz", &RateModelParams::fs_hz);

    m.def("tdr_theoretical", &tdr_theoretical, py::arg("params"),
          py::arg("mode"));

    py::class_<CrReport>(m, "CrReport")
        .def_readonly("cr1", &CrReport::cr1)
        .def_readonly("cr2", &CrReport::cr2)
        .def_readonly("cr3", &CrReport::cr3)
        .def_readonly("cr4", &CrReport::cr4);
    m.def("compression_ratios", &compression_ratios, py::arg("tdr_fs"),
          py::arg("tdr_spk"), py::arg("tdr_apm"), py::arg("tdr_pcm1"),
          py::arg("tdr_pcm4"));

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("synth", &PipelineConfig::synth)
        .def_readwrite("replicate", &PipelineConfig::replicate)
        .def_readwrite("k", &PipelineConfig::k)
        .def_readwrite("seed", &PipelineConfig::seed)
        .def_property(
            "mode",
            [](const PipelineConfig& c) {
                return c.mode == StreamMode::Apm
                           ? std::string("apm")
                           : "pcm" + std::to_string(c.bin_width_n);
            },
            [](PipelineConfig& c, const std::string& m_) {
                if (m_ == "apm") {
                    c.mode = StreamMode::Apm;
                } else {
                    c.mode = StreamMode::Pcm;
                    c.bin_width_n = uint16_t(std::stoul(m_.substr(3)));
                }
            });

    m.def("run_pipeline", [](const PipelineConfig& cfg) {
        const auto r = run_pipeline(cfg);
        py::dict d;
        d["channels"] = r.channels;
        d["total_events"] = r.total_events;
        d["rmse"] = r.fidelity.rmse;
        d["cc"] = r.fidelity.cc;
        d["tdr_bps"] = r.rates.tdr_measured_bps;
        d["cr2"] = r.rates.crs.cr2;
        d["cr3"] = r.rates.crs.cr3;
        d["cr4"] = r.rates.crs.cr4;
        d["alpha_b"] = r.rates.alpha_b;
        if (r.detection) {
            d["accuracy"] = r.detection->aggregate.accuracy;
            d["sensitivity"] = r.detection->aggregate.sensitivity;
            d["fdr"] = r.detection->aggregate.fdr;
        } else {
            d["accuracy"] = py::none();
            d["sensitivity"] = py::none();
            d["fdr"] = py::none();
        }
        return d;
    });
}
