#include <gtest/gtest.h>

#include <sstream>

#include "dynsparse/stream_io.hpp"

using namespace dynsparse;

TEST(StreamReader, ReadsHeaderBodyAndComments) {
  std::istringstream in("# a comment\nn 5\n+ 0 1\n\n- 0 1 # trailing comment\n+ 4 3\n");
  StreamReader r(in);
  EXPECT_EQ(r.header().vertices, 5u);
  EXPECT_EQ(r.header().max_weight, 0u);
  EXPECT_EQ(r.next(), (EdgeUpdate{0, 1, 1, 1}));
  EXPECT_EQ(r.next(), (EdgeUpdate{0, 1, -1, 1}));
  EXPECT_EQ(r.next(), (EdgeUpdate{4, 3, 1, 1}));
  EXPECT_FALSE(r.next());
  EXPECT_FALSE(r.next());
}

TEST(StreamReader, WeightedStreams) {
  std::istringstream in("n 4 w 15\n+ 0 1 7\n+ 1 2\n");
  StreamReader r(in);
  EXPECT_EQ(r.header().max_weight, 15u);
  EXPECT_EQ(r.next()->weight, 7u);
  EXPECT_EQ(r.next()->weight, 1u);
}

TEST(StreamReader, RejectsMalformedInput) {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    try {
      StreamReader r(in);
      while (r.next()) {
      }
    } catch (const StreamFormatError&) {
      return true;
    }
    return false;
  };
  EXPECT_TRUE(fails(""));
  EXPECT_TRUE(fails("m 4\n"));
  EXPECT_TRUE(fails("n 1\n"));
  EXPECT_TRUE(fails("n 4\n* 0 1\n"));
  EXPECT_TRUE(fails("n 4\n+ 0\n"));
  EXPECT_TRUE(fails("n 4\n+ 0 4\n"));
  EXPECT_TRUE(fails("n 4\n+ 2 2\n"));
  EXPECT_TRUE(fails("n 4\n+ 0 1 3\n"));  // weight in an unweighted stream
  EXPECT_TRUE(fails("n 4 w 3\n+ 0 1 0\n"));
  EXPECT_TRUE(fails("n 4\n+ 0 1 x\n"));
  EXPECT_TRUE(fails("n 4 w\n"));
  EXPECT_FALSE(fails("n 4\n"));
}

TEST(StreamReader, ErrorsNameTheLine) {
  std::istringstream in("n 4\n+ 0 1\n+ 0 9\n");
  StreamReader r(in);
  r.next();
  try {
    r.next();
    FAIL();
  } catch (const StreamFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}
