#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace hatescan {

// Calendar date at day resolution.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  // Strict YYYY-MM-DD; returns nullopt for anything else or an invalid day.
  static std::optional<Date> parse(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days days() const { return days_; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }
  // Signed day difference this - other.
  int days_since(Date other) const { return static_cast<int>((days_ - other.days_).count()); }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace hatescan
