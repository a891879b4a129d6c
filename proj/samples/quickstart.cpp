// Encode one message, pass it through the simulated channel, locate the
// primer and decode.
#include <iostream>
#include <random>

#include "synde/synde.hpp"

int main(int argc, char** argv) {
    using namespace synde;
    const std::string config = argc > 1 ? argv[1] : SYNDE_CONFIG_DIR "/CCM10-6.code";
    const CodeContext cc(load_code_config(config));

    std::mt19937_64 rng(7);
    BitVector message(cc.code.message_bits());
    for (std::size_t i = 0; i < message.size(); ++i)
        message.set(i, rng() & 1);
    const QuaternaryWord payload = cc.code.transmit(message);
    std::cout << "code " << cc.code.spec.identifier << ", " << message.size() << " message bits, "
              << payload.size() << " payload bases\n";

    const QuaternaryWord lp = default_left_primer(), rp = default_right_primer();
    const ReadScenario scn = compose_read(payload, lp, rp, {40, 40}, rng);
    ChannelParams ch;
    ch.noise_eps = 0.15;
    ch.stride = 2;
    ch.seed = 11;
    const SimulatedRead read = simulate_ctc_matrix(scn, ch);
    std::cout << "matrix " << read.matrix.q() << " x " << read.matrix.t() << ", primer at column "
              << read.embed_position << '\n';

    const DecodeResult r = decode_pipeline(read.matrix, cc, lp, rp, SeekParams::ctc_defaults(), {}, -1.0);
    std::cout << "seek position " << (r.seek_position ? std::to_string(*r.seek_position) : "none") << '\n'
              << "decoded " << (r.failed ? "nothing" : bits_to_hex(r.message_bits)) << '\n'
              << "sent    " << bits_to_hex(message) << '\n'
              << "score " << r.score << (r.accepted ? " (accepted)" : " (rejected)") << '\n';
    return !r.failed && r.message_bits == message ? 0 : 1;
}
