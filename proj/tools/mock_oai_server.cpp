// Serves a scripted OAI-PMH repository from a JSON fixture.

#include "glanoir/error.hpp"
#include "glanoir/mock_oai.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
    CLI::App app{"Mock OAI-PMH data provider"};
    std::string fixture_path, host = "127.0.0.1";
    int port = 8089;
    app.add_option("fixture", fixture_path, "JSON fixture")->required()->check(CLI::ExistingFile);
    app.add_option("--host", host, "Bind address");
    app.add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
    CLI11_PARSE(app, argc, argv);

    try {
        glanoir::oai::MockOaiServer server(glanoir::oai::MockFixture::load(fixture_path));
        std::cerr << "serving http://" << host << ":" << port << "/oai\n";
        server.run(host, port);
    } catch (const glanoir::Error &e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
