#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "liqsim/format.hpp"
#include "liqsim/order_book.hpp"

namespace liqsim {

enum class EventType : uint8_t { submit, trade, cancel, expire };

inline const char* event_name(EventType e) {
    switch (e) {
        case EventType::submit: return "submit";
        case EventType::trade: return "trade";
        case EventType::cancel: return "cancel";
        case EventType::expire: return "expire";
    }
    return "?";
}

// One line of the event log.  For trades, order_id and owner describe the
// resting order that was consumed and side is the aggressor side.
struct LogRecord {
    int64_t t = 0;
    EventType type = EventType::submit;
    uint64_t order_id = 0;
    int32_t owner = 0;
    Side side = Side::buy;
    double price = 0.0;
    int32_t qty = 1;
};

// Line format: t,event,order_id,owner,side,price,qty
class EventLogWriter {
public:
    explicit EventLogWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open event log for writing: " + path);
    }

    void record(const LogRecord& r) {
        out_ << r.t << ',' << event_name(r.type) << ',' << r.order_id << ',' << r.owner << ','
             << side_char(r.side) << ',' << format_double(r.price) << ',' << r.qty << '\n';
    }

    void close() {
        out_.close();
        if (!out_.good()) throw std::runtime_error("event log write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

inline LogRecord parse_event_line(std::string_view line) {
    std::string_view fields[7];
    size_t start = 0, n = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (n >= 7) throw std::invalid_argument("too many fields");
            fields[n++] = line.substr(start, i - start);
            start = i + 1;
        }
    }
    if (n != 7) throw std::invalid_argument("expected 7 fields, got " + std::to_string(n));
    LogRecord r;
    r.t = parse_int(fields[0]);
    if (fields[1] == "submit") r.type = EventType::submit;
    else if (fields[1] == "trade") r.type = EventType::trade;
    else if (fields[1] == "cancel") r.type = EventType::cancel;
    else if (fields[1] == "expire") r.type = EventType::expire;
    else throw std::invalid_argument("unknown event '" + std::string(fields[1]) + "'");
    r.order_id = static_cast<uint64_t>(parse_int(fields[2]));
    r.owner = static_cast<int32_t>(parse_int(fields[3]));
    if (fields[4] == "b") r.side = Side::buy;
    else if (fields[4] == "s") r.side = Side::sell;
    else throw std::invalid_argument("unknown side '" + std::string(fields[4]) + "'");
    r.price = parse_double(fields[5]);
    r.qty = static_cast<int32_t>(parse_int(fields[6]));
    return r;
}

inline std::vector<LogRecord> read_event_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open event log: " + path);
    std::vector<LogRecord> records;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(parse_event_line(line));
        } catch (const std::invalid_argument& err) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + err.what());
        }
    }
    return records;
}

}  // namespace liqsim
