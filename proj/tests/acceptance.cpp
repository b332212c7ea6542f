#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "surfchaos/acceptance.hpp"

using namespace surfchaos;

int main(int argc, char** argv) {
    std::vector<int> ids;
    if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
        ids.push_back(std::atoi(argv[2]));
        if (ids[0] < 1 || ids[0] > kCriteria) {
            std::fprintf(stderr, "usage: acceptance [--criterion 1..%d]\n", kCriteria);
            return 2;
        }
    } else if (argc != 1) {
        std::fprintf(stderr, "usage: acceptance [--criterion 1..%d]\n", kCriteria);
        return 2;
    } else {
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    }
    bool ok = true;
    for (int id : ids) {
        const auto r = run_criterion(id);
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}
